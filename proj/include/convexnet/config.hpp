#pragma once

// Flat configuration text: `[section]` headers and `key = value` lines, where
// a value is a number, a "string", true/false, or a one-line [array] of
// numbers or strings. `#` starts a comment. Keys are addressed as
// "section.key".

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace convexnet {

/// Carries every problem found, one message per entry.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ConfigValue {
  enum class Type { Number, String, Bool, Array };
  Type type = Type::Number;
  double number = 0.0;
  std::string text;  // string payload, or the source spelling of a number
  bool boolean = false;
  std::vector<ConfigValue> items;
  int line = 0;
};

const char* to_string(ConfigValue::Type t);

class ConfigTable {
 public:
  /// Parses the whole text; syntax errors and duplicate keys are collected and
  /// thrown together as ConfigError.
  static ConfigTable parse(const std::string& text);
  static ConfigTable load(const std::string& path);

  const std::map<std::string, ConfigValue>& entries() const { return entries_; }
  const ConfigValue* find(const std::string& key) const;

 private:
  std::map<std::string, ConfigValue> entries_;
};

/// Formats a double so that parsing it back gives the same value.
std::string format_number(double v);
std::string quote(const std::string& s);

}  // namespace convexnet
