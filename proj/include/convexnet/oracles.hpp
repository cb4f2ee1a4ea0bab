#pragma once

// Analytic sublinear functions with exact derivatives, and polytope descriptions.
// They satisfy the same interface as NetFunction<double>.

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "convexnet/linalg.hpp"
#include "convexnet/net.hpp"

namespace convexnet {

/// f(x) = sqrt(xᵀAx) for symmetric positive definite A.
///   f = c‖x‖ with A = c²I: gauge of the ball of radius 1/c, support of the ball of radius c.
///   A = diag(aᵢ²): support function of the ellipsoid with semi-axes aᵢ.
///   A = diag(aᵢ⁻²): gauge of the same ellipsoid.
class QuadraticNorm {
 public:
  using Scalar = double;

  explicit QuadraticNorm(Eigen::MatrixXd A) : A_(std::move(A)) {}

  static QuadraticNorm ball(int dim, double scale) {
    return QuadraticNorm(scale * scale * Eigen::MatrixXd::Identity(dim, dim));
  }
  static QuadraticNorm ellipsoid_support(const Eigen::VectorXd& axes) {
    return QuadraticNorm(axes.array().square().matrix().asDiagonal());
  }
  static QuadraticNorm ellipsoid_gauge(const Eigen::VectorXd& axes) {
    return QuadraticNorm(axes.array().square().inverse().matrix().asDiagonal());
  }

  int dim() const { return static_cast<int>(A_.rows()); }
  const Eigen::MatrixXd& matrix() const { return A_; }

  double value(const Point& x) const {
    if (!x.allFinite()) throw DomainError("non-finite evaluation point");
    return std::sqrt(x.dot(A_ * x));
  }

  Derivatives<double> derivatives(const Point& x, int order) const {
    detail::require_nonzero(x);
    const int d = dim();
    Derivatives<double> out;
    out.order = order;
    const Eigen::VectorXd Ax = A_ * x;
    const double f = std::sqrt(x.dot(Ax));
    out.value = f;
    if (order < 1) return out;
    const Eigen::VectorXd g = Ax / f;
    out.grad = g;
    if (order < 2) return out;
    const Eigen::MatrixXd H = (A_ - g * g.transpose()) / f;
    out.hess = H;
    if (order < 3) return out;
    for (int k = 0; k < d; ++k) {
      const Eigen::VectorXd hk = H.col(k);
      out.third[k] = -(hk * g.transpose() + g * hk.transpose()) / f - H * (g[k] / f);
    }
    return out;
  }

 private:
  Eigen::MatrixXd A_;
};

/// Convex polytope containing the origin in its interior, held in both
/// representations: vertices (columns) and facet normals wᵢ with P = ∩{wᵢ·x ≤ 1}.
struct Polytope {
  std::string name;
  Eigen::MatrixXd vertices;
  Eigen::MatrixXd facets;
  double surface_area = 0.0;
  double volume = 0.0;

  int dim() const { return static_cast<int>(vertices.rows()); }
  /// Gauge g_P(x) = maxᵢ wᵢ·x.
  double gauge(const Point& x) const { return (facets.transpose() * x).maxCoeff(); }
  /// Support h_P(x) = maxᵢ pᵢ·x.
  double support(const Point& x) const { return (vertices.transpose() * x).maxCoeff(); }
};

/// Square/cube [−1, 1]^d.
Polytope cube(int dim);
/// Cross-polytope conv{±eᵢ} (the octahedron in 3D, a rotated square in 2D).
Polytope cross_polytope(int dim);
/// Regular simplex with vertices on the unit sphere, centered at the origin.
Polytope regular_simplex(int dim);
/// Regular n-gon with vertices on the unit circle, first vertex at angle 0.
Polytope regular_polygon(int n);

/// Exact gauge (or support) of a polytope as a value-only function.
class PolytopeFunction {
 public:
  using Scalar = double;
  PolytopeFunction(const Polytope& p, bool gauge) : p_(&p), gauge_(gauge) {}
  int dim() const { return p_->dim(); }
  double value(const Point& x) const { return gauge_ ? p_->gauge(x) : p_->support(x); }

 private:
  const Polytope* p_;
  bool gauge_;
};

}  // namespace convexnet
