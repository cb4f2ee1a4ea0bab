#include "convexnet/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "convexnet/errors.hpp"

namespace convexnet {

namespace {

void check_dim(int dim) {
  if (dim < 2 || dim > 4) throw UnsupportedError("unsupported dimension " + std::to_string(dim));
}

template <class Rule>
double sum_nodes(const Rule& rule, const std::function<double(const Eigen::VectorXd&)>& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const double v = f(rule.nodes.col(i));
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite integrand at node " + std::to_string(i));
    s += rule.weights[i] * v;
  }
  return s;
}

}  // namespace

double sphere_area(int dim) {
  check_dim(dim);
  constexpr double pi = std::numbers::pi;
  switch (dim) {
    case 2: return 2.0 * pi;
    case 3: return 4.0 * pi;
    default: return 2.0 * pi * pi;
  }
}

double ball_volume(int dim) { return sphere_area(dim) / dim; }

SphereRule sphere_rule(int dim, int n) {
  check_dim(dim);
  if (n < 8) throw std::invalid_argument("sphere rule needs at least 8 nodes");
  constexpr double pi = std::numbers::pi;
  SphereRule rule;
  rule.dim = dim;
  rule.nodes.resize(dim, n);
  rule.weights = Eigen::VectorXd::Constant(n, sphere_area(dim) / n);
  if (dim == 2) {
    for (int i = 0; i < n; ++i) {
      const double t = 2.0 * pi * i / n;
      rule.nodes.col(i) << std::cos(t), std::sin(t);
    }
  } else if (dim == 3) {
    const double golden_angle = pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / n;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double t = std::fmod(golden_angle * i, 2.0 * pi);
      rule.nodes.col(i) << rho * std::cos(t), rho * std::sin(t), z;
    }
  } else {
    // Hopf coordinates: sin²η is uniform under the surface measure of S³.
    const double g = 1.32471795724474602596;  // plastic number
    const double a1 = 1.0 / g;
    const double a2 = 1.0 / (g * g);
    for (int i = 0; i < n; ++i) {
      const double s2 = (i + 0.5) / n;
      const double se = std::sqrt(s2);
      const double ce = std::sqrt(1.0 - s2);
      const double x1 = 2.0 * pi * std::fmod(0.5 + a1 * i, 1.0);
      const double x2 = 2.0 * pi * std::fmod(0.5 + a2 * i, 1.0);
      rule.nodes.col(i) << ce * std::cos(x1), ce * std::sin(x1), se * std::cos(x2),
          se * std::sin(x2);
    }
  }
  for (int i = 0; i < n; ++i) rule.nodes.col(i).normalize();
  return rule;
}

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  // Golub–Welsch: eigen-decomposition of the Jacobi matrix.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int k = 0; k < n; ++k) weights[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  // Symmetrize to remove eigen-solver rounding.
  for (int k = 0; k < n / 2; ++k) {
    const double x = 0.5 * (nodes[n - 1 - k] - nodes[k]);
    const double w = 0.5 * (weights[n - 1 - k] + weights[k]);
    nodes[k] = -x;
    nodes[n - 1 - k] = x;
    weights[k] = w;
    weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
  weights *= 2.0 / weights.sum();
}

BallRule ball_rule(int dim, int radial_n, const SphereRule& sphere) {
  check_dim(dim);
  if (radial_n < 2) throw std::invalid_argument("ball rule needs at least 2 radial nodes");
  if (sphere.dim != dim) throw std::invalid_argument("sphere rule dimension mismatch");
  Eigen::VectorXd t, w;
  gauss_legendre(radial_n, t, w);
  BallRule rule;
  rule.dim = dim;
  rule.sphere = sphere;
  rule.radii = 0.5 * (t.array() + 1.0);
  rule.radial_weights.resize(radial_n);
  for (int k = 0; k < radial_n; ++k)
    rule.radial_weights[k] = 0.5 * w[k] * std::pow(rule.radii[k], dim - 1);
  // Exact: ∫₀¹ r^{d−1} dr = 1/d.
  rule.radial_weights *= (1.0 / dim) / rule.radial_weights.sum();
  const Eigen::Index ns = sphere.size();
  rule.nodes.resize(dim, radial_n * ns);
  rule.weights.resize(radial_n * ns);
  for (int k = 0; k < radial_n; ++k)
    for (Eigen::Index j = 0; j < ns; ++j) {
      rule.nodes.col(k * ns + j) = rule.radii[k] * sphere.nodes.col(j);
      rule.weights[k * ns + j] = rule.radial_weights[k] * sphere.weights[j];
    }
  return rule;
}

double integrate(const SphereRule& rule, const std::function<double(const Eigen::VectorXd&)>& f) {
  return sum_nodes(rule, f);
}

double integrate(const BallRule& rule, const std::function<double(const Eigen::VectorXd&)>& f) {
  return sum_nodes(rule, f);
}

}  // namespace convexnet
