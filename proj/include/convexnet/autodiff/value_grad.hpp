#pragma once

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <vector>

#include "convexnet/autodiff/var.hpp"

namespace convexnet::ad {

/// A scalar together with its gradient with respect to the full parameter
/// vector. Used to combine integrals (products, ratios, powers) after each has
/// been accumulated on its own.
struct ValueGrad {
  double value = 0.0;
  Eigen::VectorXd grad;

  ValueGrad() = default;
  explicit ValueGrad(Eigen::Index n) : grad(Eigen::VectorXd::Zero(n)) {}
  ValueGrad(double v, Eigen::VectorXd g) : value(v), grad(std::move(g)) {}

  static ValueGrad constant(double v, Eigen::Index n) { return {v, Eigen::VectorXd::Zero(n)}; }
};

inline ValueGrad operator+(const ValueGrad& x, const ValueGrad& y) {
  return {x.value + y.value, x.grad + y.grad};
}
inline ValueGrad operator-(const ValueGrad& x, const ValueGrad& y) {
  return {x.value - y.value, x.grad - y.grad};
}
inline ValueGrad operator-(const ValueGrad& x) { return {-x.value, -x.grad}; }
inline ValueGrad operator*(const ValueGrad& x, const ValueGrad& y) {
  return {x.value * y.value, y.value * x.grad + x.value * y.grad};
}
inline ValueGrad operator/(const ValueGrad& x, const ValueGrad& y) {
  const double q = x.value / y.value;
  return {q, (x.grad - q * y.grad) / y.value};
}
inline ValueGrad operator*(double c, const ValueGrad& x) { return {c * x.value, c * x.grad}; }
inline ValueGrad operator*(const ValueGrad& x, double c) { return c * x; }
inline ValueGrad operator+(const ValueGrad& x, double c) { return {x.value + c, x.grad}; }
inline ValueGrad operator-(const ValueGrad& x, double c) { return {x.value - c, x.grad}; }
inline ValueGrad pow(const ValueGrad& x, double p) {
  return {std::pow(x.value, p), p * std::pow(x.value, p - 1.0) * x.grad};
}
inline ValueGrad log(const ValueGrad& x) { return {std::log(x.value), x.grad / x.value}; }
inline ValueGrad sqrt(const ValueGrad& x) {
  const double s = std::sqrt(x.value);
  return {s, x.grad * (0.5 / s)};
}
inline ValueGrad abs(const ValueGrad& x) { return x.value < 0.0 ? -x : x; }

/// Parameter vector registered as the first entries of the thread's tape.
///
/// Scalars built from `params()` are reduced one at a time with `accumulate`,
/// which back-propagates them into a parameter gradient and discards their
/// part of the tape. Memory stays proportional to a single term, however many
/// quadrature nodes contribute.
class ParameterTape {
 public:
  explicit ParameterTape(std::span<const double> theta) : base_(Tape::current().size()) {
    params_.reserve(theta.size());
    for (double t : theta) params_.push_back(Var::leaf(t));
    mark_ = Tape::current().size();
  }
  ~ParameterTape() { Tape::current().rewind(base_); }
  ParameterTape(const ParameterTape&) = delete;
  ParameterTape& operator=(const ParameterTape&) = delete;

  const std::vector<Var>& params() const { return params_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(params_.size()); }

  /// Adds weight·y (value and parameter gradient) into `into`.
  void accumulate(const Var& y, double weight, ValueGrad& into) {
    if (into.grad.size() != size()) into.grad = Eigen::VectorXd::Zero(size());
    into.value += weight * y.value();
    Tape& tape = Tape::current();
    if (!y.is_constant() && weight != 0.0) {
      tape.sweep(y.index(), weight, base_);
      auto& adj = tape.adjoint();
      for (std::size_t i = 0; i < params_.size(); ++i) {
        into.grad[static_cast<Eigen::Index>(i)] += adj[base_ + i];
        adj[base_ + i] = 0.0;
      }
      for (std::size_t i = mark_; i <= static_cast<std::size_t>(y.index()); ++i) adj[i] = 0.0;
    }
    tape.rewind(mark_);
  }

  /// Discards any tape built since construction without accumulating.
  void discard() { Tape::current().rewind(mark_); }

 private:
  std::size_t base_;
  std::size_t mark_;
  std::vector<Var> params_;
};

}  // namespace convexnet::ad
