#pragma once

// Arithmetic expressions over coordinates, e.g. "sin(3*x1)*x2 - 0.5".
// Variables: x1..x4 (aliases x, y, z, w), constant pi. Functions: sin, cos,
// exp, log, sqrt, abs, tanh. Operators: + - * / ^ (exponent must be constant).

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "convexnet/linalg.hpp"

namespace convexnet {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Expression {
 public:
  /// Parses `text`; throws ExpressionError with the offending position.
  explicit Expression(const std::string& text);
  Expression() : Expression("0") {}

  const std::string& text() const { return text_; }
  /// Largest variable index referenced (1-based), 0 if none.
  int max_variable() const { return max_var_; }

  template <class S>
  S operator()(const Vec<S>& y) const {
    return eval<S>(root_, y);
  }
  double operator()(const Eigen::VectorXd& y) const {
    Vec<double> v = y;
    return eval<double>(root_, v);
  }

  enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt, Abs, Tanh };
  struct Node {
    Op op;
    double value = 0.0;
    int var = 0;
    int lhs = -1;
    int rhs = -1;
  };

 private:
  template <class S>
  S eval(int i, const Vec<S>& y) const {
    using std::abs;
    using std::cos;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    using std::sqrt;
    using std::tanh;
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Const: return S(n.value);
      case Op::Var:
        if (n.var >= y.size()) throw ExpressionError("expression uses x" + std::to_string(n.var + 1) + " beyond the dimension");
        return y[n.var];
      case Op::Neg: return -eval<S>(n.lhs, y);
      case Op::Add: return eval<S>(n.lhs, y) + eval<S>(n.rhs, y);
      case Op::Sub: return eval<S>(n.lhs, y) - eval<S>(n.rhs, y);
      case Op::Mul: return eval<S>(n.lhs, y) * eval<S>(n.rhs, y);
      case Op::Div: return eval<S>(n.lhs, y) / eval<S>(n.rhs, y);
      case Op::Pow: {
        const double p = nodes_[n.rhs].value;
        const S b = eval<S>(n.lhs, y);
        if (p == std::round(p) && std::abs(p) <= 8) {
          S r(1.0);
          for (int k = 0; k < std::abs(static_cast<int>(p)); ++k) r = r * b;
          return p < 0 ? S(1.0) / r : r;
        }
        return pow(b, p);
      }
      case Op::Sin: return sin(eval<S>(n.lhs, y));
      case Op::Cos: return cos(eval<S>(n.lhs, y));
      case Op::Exp: return exp(eval<S>(n.lhs, y));
      case Op::Log: return log(eval<S>(n.lhs, y));
      case Op::Sqrt: return sqrt(eval<S>(n.lhs, y));
      case Op::Abs: return abs(eval<S>(n.lhs, y));
      case Op::Tanh: return tanh(eval<S>(n.lhs, y));
    }
    return S(0.0);
  }

  friend class ExpressionParser;
  std::string text_;
  std::vector<Node> nodes_;
  int root_ = 0;
  int max_var_ = 0;
};

}  // namespace convexnet
