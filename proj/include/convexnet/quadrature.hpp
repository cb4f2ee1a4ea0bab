#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

namespace convexnet {

/// Nodes (columns) on the unit sphere S^{d−1} with positive weights.
struct SphereRule {
  int dim = 0;
  Eigen::MatrixXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.cols(); }
};

/// Tensor product of a radial Gauss–Legendre rule (weights include r^{d−1}) and a
/// sphere rule. Node (k, j) is radii[k]·sphere.nodes.col(j).
struct BallRule {
  int dim = 0;
  Eigen::VectorXd radii;
  Eigen::VectorXd radial_weights;
  SphereRule sphere;
  Eigen::MatrixXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.cols(); }
};

/// Surface area of S^{d−1} and volume of the unit d-ball.
double sphere_area(int dim);
double ball_volume(int dim);

/// d=2: N equispaced angles; d=3: Fibonacci lattice; d=4: Hopf coordinates with a
/// Kronecker sequence on the two angles. Equal weights summing to the area.
SphereRule sphere_rule(int dim, int n);
/// Gauss–Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);
BallRule ball_rule(int dim, int radial_n, const SphereRule& sphere);

/// Σ wᵢ f(xᵢ) in node order. Throws std::runtime_error naming the node if f is not finite.
double integrate(const SphereRule& rule, const std::function<double(const Eigen::VectorXd&)>& f);
double integrate(const BallRule& rule, const std::function<double(const Eigen::VectorXd&)>& f);

inline constexpr int default_sphere_n(int dim) { return dim == 2 ? 256 : dim == 3 ? 2048 : 8192; }
inline constexpr int kDefaultRadialN = 16;

}  // namespace convexnet
