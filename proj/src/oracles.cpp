#include "convexnet/oracles.hpp"

#include <Eigen/QR>
#include <numbers>
#include <stdexcept>

namespace convexnet {

namespace {

Eigen::MatrixXd sign_patterns(int dim) {
  const int n = 1 << dim;
  Eigen::MatrixXd s(dim, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < dim; ++i) s(i, k) = (k >> i) & 1 ? -1.0 : 1.0;
  return s;
}

Eigen::MatrixXd signed_axes(int dim) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, 2 * dim);
  for (int i = 0; i < dim; ++i) {
    a(i, 2 * i) = 1.0;
    a(i, 2 * i + 1) = -1.0;
  }
  return a;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

Polytope cube(int dim) {
  Polytope p;
  p.name = "cube";
  p.vertices = sign_patterns(dim);
  p.facets = signed_axes(dim);
  p.volume = std::pow(2.0, dim);
  p.surface_area = 2.0 * dim * std::pow(2.0, dim - 1);
  return p;
}

Polytope cross_polytope(int dim) {
  Polytope p;
  p.name = "octahedron";
  p.vertices = signed_axes(dim);
  p.facets = sign_patterns(dim);
  p.volume = std::pow(2.0, dim) / factorial(dim);
  p.surface_area = std::pow(2.0, dim) * std::sqrt(static_cast<double>(dim)) / factorial(dim - 1);
  return p;
}

Polytope regular_simplex(int dim) {
  const int n = dim + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  A.col(0).setOnes();
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
  const Eigen::MatrixXd basis = Q.rightCols(dim);  // orthonormal complement of (1, …, 1)
  Polytope p;
  p.name = "simplex";
  p.vertices.resize(dim, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Constant(n, -1.0 / n);
    e[i] += 1.0;
    const Eigen::VectorXd v = basis.transpose() * e;
    p.vertices.col(i) = v / v.norm();
  }
  // Facet opposite vᵢ lies at distance 1/d along −vᵢ.
  p.facets = -static_cast<double>(dim) * p.vertices;
  const double edge = std::sqrt(2.0 * n / dim);
  p.volume = std::pow(edge, dim) / factorial(dim) * std::sqrt(n / std::pow(2.0, dim));
  p.surface_area = dim * dim * p.volume;
  return p;
}

Polytope regular_polygon(int n) {
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  constexpr double pi = std::numbers::pi;
  Polytope p;
  p.name = "polygon" + std::to_string(n);
  p.vertices.resize(2, n);
  p.facets.resize(2, n);
  const double c = std::cos(pi / n);
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * pi * k / n;
    p.vertices.col(k) << std::cos(t), std::sin(t);
    const double s = t + pi / n;
    p.facets.col(k) << std::cos(s) / c, std::sin(s) / c;
  }
  p.volume = 0.5 * n * std::sin(2.0 * pi / n);
  p.surface_area = 2.0 * n * std::sin(pi / n);
  return p;
}

}  // namespace convexnet
