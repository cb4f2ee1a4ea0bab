#include "convexnet/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace convexnet {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string s = "invalid configuration";
  for (const auto& p : problems) s += "\n  " + p;
  return s;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Letters, digits, '_' and '-', with '.' between parts.
bool valid_name(const std::string& s) {
  if (s.empty() || s.front() == '.' || s.back() == '.' || s.find("..") != std::string::npos)
    return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      return false;
  return true;
}

class ValueParser {
 public:
  ValueParser(const std::string& s, int line) : s_(s), line_(line) {}

  ConfigValue parse_top() {
    ConfigValue v = parse_value(true);
    skip_space();
    if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected text after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  ConfigValue parse_value(bool allow_array) {
    skip_space();
    if (pos_ >= s_.size()) fail("missing value");
    ConfigValue v;
    v.line = line_;
    const char c = s_[pos_];
    if (c == '"') {
      v.type = ConfigValue::Type::String;
      ++pos_;
      for (;;) {
        if (pos_ >= s_.size()) fail("unterminated string");
        const char ch = s_[pos_++];
        if (ch == '"') break;
        if (ch == '\\') {
          if (pos_ >= s_.size()) fail("unterminated escape");
          const char e = s_[pos_++];
          if (e == 'n') v.text += '\n';
          else if (e == '"' || e == '\\') v.text += e;
          else fail(std::string("unknown escape \\") + e);
        } else {
          v.text += ch;
        }
      }
      return v;
    }
    if (c == '[') {
      if (!allow_array) fail("nested arrays are not supported");
      v.type = ConfigValue::Type::Array;
      ++pos_;
      skip_space();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      for (;;) {
        v.items.push_back(parse_value(false));
        skip_space();
        if (pos_ >= s_.size()) fail("unterminated array");
        if (s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          break;
        }
        fail("expected ',' or ']' in array");
      }
      return v;
    }
    std::size_t end = pos_;
    while (end < s_.size() && !std::isspace(static_cast<unsigned char>(s_[end])) && s_[end] != ',' &&
           s_[end] != ']' && s_[end] != '#')
      ++end;
    const std::string word = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (word == "true" || word == "false") {
      v.type = ConfigValue::Type::Bool;
      v.boolean = word == "true";
      v.text = word;
      return v;
    }
    double x = 0.0;
    const auto res = std::from_chars(word.data(), word.data() + word.size(), x);
    if (word.empty() || res.ec != std::errc() || res.ptr != word.data() + word.size())
      fail("cannot read value '" + word + "' (strings need double quotes)");
    if (!std::isfinite(x)) fail("non-finite number '" + word + "'");
    v.type = ConfigValue::Type::Number;
    v.number = x;
    v.text = word;
    return v;
  }

  const std::string& s_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

const char* to_string(ConfigValue::Type t) {
  switch (t) {
    case ConfigValue::Type::Number: return "number";
    case ConfigValue::Type::String: return "string";
    case ConfigValue::Type::Bool: return "boolean";
    case ConfigValue::Type::Array: return "array";
  }
  return "?";
}

ConfigTable ConfigTable::parse(const std::string& text) {
  ConfigTable table;
  std::vector<std::string> problems;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line[0] == '[') {
      const auto close = line.find(']');
      const std::string rest = close == std::string::npos ? "" : trim(line.substr(close + 1));
      const std::string name = close == std::string::npos ? "" : trim(line.substr(1, close - 1));
      if (close == std::string::npos || !(rest.empty() || rest[0] == '#') || !valid_name(name)) {
        problems.push_back(where + "malformed section header '" + line + "'");
        continue;
      }
      section = name;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(where + "expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key)) {
      problems.push_back(where + "malformed key '" + key + "'");
      continue;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      const std::string rhs = line.substr(eq + 1);
      ConfigValue v = ValueParser(rhs, line_no).parse_top();
      if (table.entries_.count(full)) {
        problems.push_back(where + "duplicate key '" + full + "' (first set on line " +
                           std::to_string(table.entries_[full].line) + ")");
        continue;
      }
      table.entries_.emplace(full, std::move(v));
    } catch (const std::invalid_argument& e) {
      problems.push_back(where + "key '" + full + "': " + e.what());
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return table;
}

ConfigTable ConfigTable::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

const ConfigValue* ConfigTable::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

}  // namespace convexnet
