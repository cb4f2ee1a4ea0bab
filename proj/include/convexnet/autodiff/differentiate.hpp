#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>

#include "convexnet/autodiff/jet.hpp"

namespace convexnet::ad {

/// Gradient of a scalar field given as a generic callable `f(const std::array<S, K>&) -> S`.
/// The callable is instantiated with S = Jet<double, K>.
template <int K, class F>
Eigen::Matrix<double, K, 1> gradient(F&& f, const Eigen::Matrix<double, K, 1>& x) {
  using J = Jet<double, K>;
  std::array<J, K> xs;
  for (int i = 0; i < K; ++i) xs[i] = J::variable(x[i], i);
  const J y = f(xs);
  Eigen::Matrix<double, K, 1> g;
  for (int i = 0; i < K; ++i) g[i] = y.v[i];
  return g;
}

/// Jacobian of a map `F(const std::array<S, K>&) -> std::array<S, K>`; row i is ∇F_i.
template <int K, class F>
Eigen::Matrix<double, K, K> jacobian(F&& fn, const Eigen::Matrix<double, K, 1>& x) {
  using J = Jet<double, K>;
  std::array<J, K> xs;
  for (int i = 0; i < K; ++i) xs[i] = J::variable(x[i], i);
  const std::array<J, K> y = fn(xs);
  Eigen::Matrix<double, K, K> jac;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) jac(i, j) = y[i].v[j];
  return jac;
}

/// Hessian by nesting two forward passes.
template <int K, class F>
Eigen::Matrix<double, K, K> hessian(F&& f, const Eigen::Matrix<double, K, 1>& x) {
  using J1 = Jet<double, K>;
  using J2 = Jet<J1, K>;
  std::array<J2, K> xs;
  for (int i = 0; i < K; ++i) {
    xs[i] = J2(J1::variable(x[i], i));
    xs[i].v[i] = J1(1.0);
  }
  const J2 y = f(xs);
  Eigen::Matrix<double, K, K> h;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) h(i, j) = y.v[i].v[j];
  return h;
}

/// Third directional derivative d³/dt³ f(x + t·dir) at t = 0, by three levels of nesting.
template <int K, class F>
double third_directional(F&& f, const Eigen::Matrix<double, K, 1>& x,
                         const Eigen::Matrix<double, K, 1>& dir) {
  using J1 = Jet<double, 1>;
  using J2 = Jet<J1, 1>;
  using J3 = Jet<J2, 1>;
  std::array<J3, K> xs;
  for (int i = 0; i < K; ++i) {
    J1 a1(x[i]);
    a1.v[0] = dir[i];
    J2 a2(a1);
    a2.v[0] = J1(dir[i]);
    J3 a3(a2);
    a3.v[0] = J2(dir[i]);
    xs[i] = a3;
  }
  const J3 y = f(xs);
  return y.v[0].v[0].v[0];
}

/// Central finite-difference gradient of a double-valued function.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + step;
    const double fp = f(xp);
    xp[i] = xi - step;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

struct GradientCheckReport {
  double max_abs_error = 0.0;
  /// max_i |a_i − fd_i| / max(‖a‖∞, ‖fd‖∞).
  double max_rel_error = 0.0;
  Eigen::VectorXd analytic;
  Eigen::VectorXd numeric;
};

/// Compares an analytic gradient against central differences with the given step.
inline GradientCheckReport check_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& analytic,
                                          const Eigen::VectorXd& x, double step) {
  GradientCheckReport report;
  report.analytic = analytic;
  report.numeric = finite_difference_gradient(f, x, step);
  const double scale =
      std::max({analytic.lpNorm<Eigen::Infinity>(), report.numeric.lpNorm<Eigen::Infinity>(),
                std::numeric_limits<double>::min()});
  report.max_abs_error = (analytic - report.numeric).lpNorm<Eigen::Infinity>();
  report.max_rel_error = report.max_abs_error / scale;
  return report;
}

}  // namespace convexnet::ad
