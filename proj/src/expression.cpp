#include "convexnet/expression.hpp"

#include <cctype>
#include <numbers>

namespace convexnet {

class ExpressionParser {
 public:
  ExpressionParser(Expression& e, const std::string& s) : e_(e), s_(s) {}

  int parse() {
    const int r = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return r;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ExpressionError("expression '" + s_ + "' at position " + std::to_string(pos_) + ": " + msg);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  int add(Expression::Node n) {
    e_.nodes_.push_back(n);
    return static_cast<int>(e_.nodes_.size() - 1);
  }
  int binary(Op op, int l, int r) { return add({op, 0.0, 0, l, r}); }

  int sum() {
    int l = product();
    for (;;) {
      if (accept('+')) l = binary(Op::Add, l, product());
      else if (accept('-')) l = binary(Op::Sub, l, product());
      else return l;
    }
  }
  int product() {
    int l = unary();
    for (;;) {
      if (accept('*')) l = binary(Op::Mul, l, unary());
      else if (accept('/')) l = binary(Op::Div, l, unary());
      else return l;
    }
  }
  int unary() {
    if (accept('-')) return add({Op::Neg, 0.0, 0, power(), -1});
    if (accept('+')) return power();
    return power();
  }
  int power() {
    const int base = atom();
    if (accept('^')) {
      const std::size_t at = pos_;
      const int ex = unary();
      double v;
      if (!constant(ex, v)) {
        pos_ = at;
        fail("exponent must be a constant");
      }
      const int c = add({Op::Const, v, 0, -1, -1});
      return binary(Op::Pow, base, c);
    }
    return base;
  }
  bool constant(int i, double& v) const {
    const auto& n = e_.nodes_[i];
    if (n.op == Op::Const) {
      v = n.value;
      return true;
    }
    if (n.op == Op::Neg && constant(n.lhs, v)) {
      v = -v;
      return true;
    }
    return false;
  }
  int atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      const int r = sum();
      if (!accept(')')) fail("expected ')'");
      return r;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return add({Op::Const, v, 0, -1, -1});
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
      const std::string name = s_.substr(pos_, end - pos_);
      pos_ = end;
      if (name == "pi") return add({Op::Const, std::numbers::pi, 0, -1, -1});
      int var = -1;
      if (name == "x") var = 0;
      else if (name == "y") var = 1;
      else if (name == "z") var = 2;
      else if (name == "w") var = 3;
      else if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '4') var = name[1] - '1';
      if (var >= 0) {
        e_.max_var_ = std::max(e_.max_var_, var + 1);
        return add({Op::Var, 0.0, var, -1, -1});
      }
      static const std::pair<const char*, Op> fns[] = {{"sin", Op::Sin},   {"cos", Op::Cos},
                                                       {"exp", Op::Exp},   {"log", Op::Log},
                                                       {"sqrt", Op::Sqrt}, {"abs", Op::Abs},
                                                       {"tanh", Op::Tanh}};
      for (const auto& [fname, op] : fns)
        if (name == fname) {
          if (!accept('(')) fail("expected '(' after " + name);
          const int arg = sum();
          if (!accept(')')) fail("expected ')'");
          return add({op, 0.0, 0, arg, -1});
        }
      fail("unknown name '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expression& e_;
  const std::string& s_;
  std::size_t pos_ = 0;
};

Expression::Expression(const std::string& text) : text_(text) {
  ExpressionParser p(*this, text_);
  root_ = p.parse();
}

}  // namespace convexnet
