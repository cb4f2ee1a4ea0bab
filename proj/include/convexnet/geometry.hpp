#pragma once

// Convex bodies as images of the unit ball under the gauge map x ↦ (‖x‖/p(x))x
// or the support map x ↦ ‖x‖∇p(x), for any sublinear function type F with
//   using Scalar; int dim() const; Scalar value(const Point&) const;
//   Derivatives<Scalar> derivatives(const Point&, int order) const;

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "convexnet/errors.hpp"
#include "convexnet/linalg.hpp"
#include "convexnet/net.hpp"
#include "convexnet/quadrature.hpp"

namespace convexnet {

enum class BodyKind { Gauge, Support };

inline BodyKind flipped(BodyKind k) {
  return k == BodyKind::Gauge ? BodyKind::Support : BodyKind::Gauge;
}
inline const char* to_string(BodyKind k) { return k == BodyKind::Gauge ? "gauge" : "support"; }

template <class F>
struct ConvexBody {
  using Scalar = typename F::Scalar;
  F fn;
  BodyKind kind = BodyKind::Gauge;

  int dim() const { return fn.dim(); }
};

template <class F>
ConvexBody<F> make_body(F fn, BodyKind kind) {
  return {std::move(fn), kind};
}

/// Same function, roles swapped: the gauge of K is the support of K°.
template <class F>
ConvexBody<F> polar_body(const ConvexBody<F>& body) {
  return {body.fn, flipped(body.kind)};
}

/// φ(x), Dφ(x) and, on request, the partials ∂ₖDφ(x).
template <class S>
struct LocalMap {
  Vec<S> y;
  Mat<S> J;
  bool has_dJ = false;
  std::array<Mat<S>, kMaxDim> dJ;
};

template <class S>
struct BoundaryFrame {
  Point x;
  Vec<S> y;
  Mat<S> J;
  S jac{};
  S surf_jac{};
  Vec<S> n;
};

/// Boundary frame together with the Weingarten map in the Householder tangent basis.
template <class S>
struct CurvatureFrame {
  BoundaryFrame<S> frame;
  Mat<S> S_;
  S mean{};
  S gauss{};
};

namespace detail {

template <class S>
S positive_value(const S& v) {
  if (!(value_of(v) > 0.0) || !std::isfinite(value_of(v)))
    throw InvalidBodyError("sublinear function is not positive at a boundary-map node");
  return v;
}

}  // namespace detail

/// φ and its derivatives at x ≠ 0. `with_dJ` additionally returns ∂ₖDφ.
template <class F>
LocalMap<typename F::Scalar> local_map(const ConvexBody<F>& body, const Point& x, bool with_dJ) {
  using S = typename F::Scalar;
  detail::require_nonzero(x);
  const int d = body.dim();
  const double r = x.norm();
  const Point u = x / r;
  LocalMap<S> out;
  out.has_dJ = with_dJ;
  if (body.kind == BodyKind::Gauge) {
    const auto j = body.fn.derivatives(x, with_dJ ? 2 : 1);
    const S ph = detail::positive_value(S(j.value * (1.0 / r)));  // p(u)
    const S inv = S(1.0) / ph;
    const S inv2 = inv * inv;
    out.y.resize(d);
    for (int a = 0; a < d; ++a) out.y[a] = x[a] * inv;
    out.J.resize(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        out.J(a, b) = ((a == b ? 1.0 : 0.0) + u[a] * u[b]) * inv - u[a] * j.grad[b] * inv2;
    if (!with_dJ) return out;
    const S inv3 = inv2 * inv;
    for (int k = 0; k < d; ++k) {
      Vec<double> delta(d);
      for (int a = 0; a < d; ++a) delta[a] = ((a == k ? 1.0 : 0.0) - u[a] * u[k]) / r;
      S gd(0.0);
      for (int a = 0; a < d; ++a) gd = gd + j.grad[a] * delta[a];
      Mat<S> D(d, d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          S s = (delta[a] * u[b] + u[a] * delta[b]) * inv;
          s = s - ((a == b ? 1.0 : 0.0) + u[a] * u[b]) * (gd * inv2);
          s = s - delta[a] * j.grad[b] * inv2;
          s = s - u[a] * j.hess(b, k) * inv2;
          s = s + 2.0 * u[a] * j.grad[b] * gd * inv3;
          D(a, b) = s;
        }
      out.dJ[k] = D;
    }
    return out;
  }
  const auto j = body.fn.derivatives(x, with_dJ ? 3 : 2);
  detail::positive_value(j.value);
  out.y.resize(d);
  for (int a = 0; a < d; ++a) out.y[a] = r * j.grad[a];
  out.J.resize(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out.J(a, b) = j.grad[a] * u[b] + r * j.hess(a, b);
  if (!with_dJ) return out;
  for (int k = 0; k < d; ++k) {
    Vec<double> delta(d);
    for (int a = 0; a < d; ++a) delta[a] = ((a == k ? 1.0 : 0.0) - u[a] * u[k]) / r;
    Mat<S> D(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        D(a, b) = j.hess(a, k) * u[b] + j.grad[a] * delta[b] + u[k] * j.hess(a, b) +
                  r * j.third[k](a, b);
    out.dJ[k] = D;
  }
  return out;
}

/// φ(x); φ(0) = 0.
template <class F>
Vec<typename F::Scalar> map(const ConvexBody<F>& body, const Point& x) {
  using S = typename F::Scalar;
  if (!x.allFinite()) throw DomainError("non-finite evaluation point");
  const int d = body.dim();
  if (x.norm() == 0.0) return Vec<S>::Constant(d, S(0.0));
  detail::require_nonzero(x);
  const double r = x.norm();
  Vec<S> y(d);
  if (body.kind == BodyKind::Gauge) {
    const S p = detail::positive_value(body.fn.value(x));
    for (int a = 0; a < d; ++a) y[a] = (r * x[a]) / p;
  } else if constexpr (requires(const F& f) { f.derivatives(x, 1); }) {
    const auto j = body.fn.derivatives(x, 1);
    detail::positive_value(j.value);
    for (int a = 0; a < d; ++a) y[a] = r * j.grad[a];
  } else {
    throw UnsupportedError("support map needs a differentiable function");
  }
  return y;
}

/// φ⁻¹(y) = (p(y)/‖y‖)·y for gauge bodies.
template <class F>
Point inverse_gauge(const ConvexBody<F>& body, const Point& y) {
  if (body.kind != BodyKind::Gauge)
    throw UnsupportedError("inverse map is only available in closed form for gauge bodies");
  detail::require_nonzero(y);
  return (value_of(body.fn.value(y)) / y.norm()) * y;
}

namespace detail {

template <class S>
struct NormalParts {
  SmallLu<S> lu;
  Vec<S> a;  // J⁻ᵀx
  S a_norm;
  S det;
};

template <class S>
NormalParts<S> normal_parts(const Mat<S>& J, const Point& x) {
  using std::abs;
  using std::sqrt;
  SmallLu<S> lu(J);
  const S det = lu.determinant();
  if (lu.singular() || std::abs(value_of(det)) < 1e-12)
    throw DegenerateMapError("boundary map Jacobian is singular (|det| < 1e-12)");
  const Vec<S> a = lu.solve_transposed(cast_vec<S>(x));
  return {lu, a, sqrt(dot(a, a)), det};
}

}  // namespace detail

/// Boundary point, Jacobians and outward unit normal at x ∈ ∂B.
template <class F>
BoundaryFrame<typename F::Scalar> boundary_frame(const ConvexBody<F>& body, const Point& x) {
  using S = typename F::Scalar;
  using std::abs;
  if (std::abs(x.norm() - 1.0) > 1e-10) throw DomainError("boundary frame needs ‖x‖ = 1");
  auto m = local_map(body, x, false);
  const auto parts = detail::normal_parts(m.J, x);
  BoundaryFrame<S> f;
  f.x = x;
  f.y = std::move(m.y);
  f.J = std::move(m.J);
  f.jac = abs(parts.det);
  f.surf_jac = f.jac * parts.a_norm;
  f.n = parts.a / parts.a_norm;
  return f;
}

/// Rows 0..d−2 of the Householder reflection sending n to ±e_d: an orthonormal
/// basis of the tangent space at a point with unit normal n.
template <class S>
Mat<S> tangent_basis(const Vec<S>& n) {
  const int d = static_cast<int>(n.size());
  Vec<S> v = n;
  const bool flip = (values(n) - Vec<double>::Unit(d, d - 1)).norm() < 1e-6;
  v[d - 1] = v[d - 1] + (flip ? 1.0 : -1.0);
  const S vv = dot(v, v);
  Mat<S> T(d - 1, d);
  for (int i = 0; i < d - 1; ++i)
    for (int j = 0; j < d; ++j) T(i, j) = (i == j ? 1.0 : 0.0) - 2.0 * v[i] * v[j] / vv;
  return T;
}

/// Weingarten map S = H̃·Dn·H̃ᵀ at φ(x), x ∈ ∂B, where n is extended off the
/// boundary through x ↦ J(x)⁻ᵀx/‖J(x)⁻ᵀx‖ and Dn(y) = DN(x)·J(x)⁻¹.
template <class F>
CurvatureFrame<typename F::Scalar> curvature_frame(const ConvexBody<F>& body, const Point& x) {
  using S = typename F::Scalar;
  using std::abs;
  if (std::abs(x.norm() - 1.0) > 1e-10) throw DomainError("boundary frame needs ‖x‖ = 1");
  const int d = body.dim();
  auto m = local_map(body, x, true);
  const auto parts = detail::normal_parts(m.J, x);
  CurvatureFrame<S> c;
  auto& f = c.frame;
  f.x = x;
  f.y = m.y;
  f.J = m.J;
  f.jac = abs(parts.det);
  f.surf_jac = f.jac * parts.a_norm;
  const S inv_norm = S(1.0) / parts.a_norm;
  f.n = parts.a * inv_norm;

  // DN[:, k] = (I − nnᵀ)(−J⁻ᵀ ∂ₖJᵀ a + J⁻ᵀ eₖ)/‖a‖
  Mat<S> DN(d, d);
  for (int k = 0; k < d; ++k) {
    Vec<S> rhs(d);
    for (int b = 0; b < d; ++b) {
      S s(b == k ? 1.0 : 0.0);
      for (int a = 0; a < d; ++a) s = s - m.dJ[k](a, b) * parts.a[a];
      rhs[b] = s;
    }
    const Vec<S> da = parts.lu.solve_transposed(rhs);
    const S nd = dot(f.n, da);
    for (int a = 0; a < d; ++a) DN(a, k) = (da[a] - f.n[a] * nd) * inv_norm;
  }
  const Mat<S> Jinv = parts.lu.inverse();
  const Mat<S> Dn = matmul(DN, Jinv);
  const Mat<S> T = tangent_basis(f.n);
  const Mat<S> W = matmul(matmul(T, Dn), transpose(T));
  c.S_ = W;
  c.mean = trace(W) * (1.0 / (d - 1));
  if (d == 2) {
    c.gauss = W(0, 0);
  } else {
    c.gauss = SmallLu<S>(W).determinant();
  }
  return c;
}

template <class F>
Mat<typename F::Scalar> weingarten(const ConvexBody<F>& body, const Point& x) {
  return curvature_frame(body, x).S_;
}
template <class F>
typename F::Scalar mean_curvature(const ConvexBody<F>& body, const Point& x) {
  return curvature_frame(body, x).mean;
}
template <class F>
typename F::Scalar gaussian_curvature(const ConvexBody<F>& body, const Point& x) {
  return curvature_frame(body, x).gauss;
}

/// |det Dφ| at x ≠ 0 (0-homogeneous in x). A vanishing determinant is a valid
/// volume weight (near-polytopal support bodies), so only non-finite values throw.
template <class F>
typename F::Scalar jacobian_determinant(const ConvexBody<F>& body, const Point& x) {
  using std::abs;
  const auto m = local_map(body, x, false);
  const auto det = SmallLu<typename F::Scalar>(m.J).determinant();
  if (!std::isfinite(value_of(det))) throw DegenerateMapError("map Jacobian is not finite");
  return abs(det);
}

/// Integrand of Vol over the unit sphere at u, including the radial factor.
/// Generic case: |det Dφ(u)|/d. Support bodies in 2D use ½(h² − h′²) with
/// h′ = ∇h·u⊥, the area formula integrated by parts; it has no second
/// derivatives, so it does not concentrate near the corners of sharp nets.
template <class F>
typename F::Scalar volume_density(const ConvexBody<F>& body, const Point& u) {
  const int d = body.dim();
  if (body.kind == BodyKind::Support && d == 2) {
    const auto j = body.fn.derivatives(u, 1);
    const auto t = j.grad[1] * u[0] - j.grad[0] * u[1];
    return (j.value * j.value - t * t) * 0.5;
  }
  return jacobian_determinant(body, u) * (1.0 / d);
}

/// Vol(φ(B)) = ∫_B |det Dφ|. The integrand is 0-homogeneous, so only the
/// sphere part of the rule is used.
template <class F>
typename F::Scalar volume(const ConvexBody<F>& body, const BallRule& rule) {
  using S = typename F::Scalar;
  const auto& sph = rule.sphere;
  S total(0.0);
  for (Eigen::Index i = 0; i < sph.size(); ++i)
    total = total + volume_density(body, sph.nodes.col(i)) * sph.weights[i];
  return total;
}

/// Per(φ(B)) = ∫_{∂B} |det Dφ|·‖Dφ⁻ᵀx‖ dσ.
template <class F>
typename F::Scalar surface_area(const ConvexBody<F>& body, const SphereRule& rule) {
  using S = typename F::Scalar;
  S total(0.0);
  for (Eigen::Index i = 0; i < rule.size(); ++i)
    total = total + boundary_frame(body, rule.nodes.col(i)).surf_jac * rule.weights[i];
  return total;
}

/// ∫_{φ(B)} f = ∫_B f(φ(x))|det Dφ(x)| dx; f receives the image point.
template <class F, class Fn>
typename F::Scalar volume_integral(const ConvexBody<F>& body, Fn&& f, const BallRule& rule) {
  using S = typename F::Scalar;
  S total(0.0);
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const Point x = rule.nodes.col(i);
    const auto m = local_map(body, x, false);
    SmallLu<S> lu(m.J);
    using std::abs;
    total = total + f(m.y) * abs(lu.determinant()) * rule.weights[i];
  }
  return total;
}

/// ∫_{∂φ(B)} g over the boundary frames; g receives the frame (y, n, …).
template <class F, class Fn>
typename F::Scalar surface_integral(const ConvexBody<F>& body, Fn&& g, const SphereRule& rule) {
  using S = typename F::Scalar;
  S total(0.0);
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const auto f = boundary_frame(body, rule.nodes.col(i));
    total = total + g(f) * f.surf_jac * rule.weights[i];
  }
  return total;
}

/// As surface_integral, with the integrand receiving the curvature frame.
template <class F, class Fn>
typename F::Scalar curvature_integral(const ConvexBody<F>& body, Fn&& g, const SphereRule& rule) {
  using S = typename F::Scalar;
  S total(0.0);
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const auto c = curvature_frame(body, rule.nodes.col(i));
    total = total + g(c) * c.frame.surf_jac * rule.weights[i];
  }
  return total;
}

/// Minimum of p on the rule's nodes; a body is accepted if it is ≥ eps.
template <class F>
bool validate_body(const ConvexBody<F>& body, const SphereRule& rule, double eps) {
  for (Eigen::Index i = 0; i < rule.size(); ++i)
    if (!(value_of(body.fn.value(rule.nodes.col(i))) >= eps)) return false;
  return true;
}

struct HausdorffEstimate {
  double value = 0.0;
  /// True when value is an upper bound on the Hausdorff distance (both gauge);
  /// false for the discrete boundary-cloud estimate.
  bool is_upper_bound = false;
};

/// Symmetric Hausdorff distance between two finite point clouds (columns).
double cloud_hausdorff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Gauge/gauge: sup over N sphere samples of |1/p_A − 1/p_B| (radial-function gap).
/// Otherwise: discrete Hausdorff distance between the two mapped boundary clouds.
template <class FA, class FB>
HausdorffEstimate hausdorff_estimate(const ConvexBody<FA>& A, const ConvexBody<FB>& B, int n) {
  const auto rule = sphere_rule(A.dim(), n);
  HausdorffEstimate h;
  if (A.kind == BodyKind::Gauge && B.kind == BodyKind::Gauge) {
    h.is_upper_bound = true;
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
      const Point u = rule.nodes.col(i);
      const double ra = 1.0 / value_of(A.fn.value(u));
      const double rb = 1.0 / value_of(B.fn.value(u));
      h.value = std::max(h.value, std::abs(ra - rb));
    }
    return h;
  }
  auto cloud = [&](const auto& body) {
    Eigen::MatrixXd pts(body.dim(), rule.size());
    for (Eigen::Index i = 0; i < rule.size(); ++i)
      pts.col(i) = values(map(body, rule.nodes.col(i)));
    return pts;
  };
  h.value = cloud_hausdorff(cloud(A), cloud(B));
  return h;
}

// Shape export. 2D: polyline through φ(nodes) in node order; 3D: UV-sphere grid.

struct Mesh {
  Eigen::MatrixXd vertices;  // 3 × V
  Eigen::MatrixXd normals;   // 3 × V
  std::vector<std::array<int, 3>> triangles;
};

/// UV-sphere grid: `rows` latitude rings at polar angle π(i+½)/rows, `cols`
/// longitudes each; quads split into two triangles and the rings closed at the
/// poles by triangle fans between the first/last rings. Vertex count rows·cols.
Eigen::MatrixXd uv_sphere_grid(int rows, int cols);
std::vector<std::array<int, 3>> uv_sphere_triangles(int rows, int cols);

template <class F>
Mesh boundary_mesh(const ConvexBody<F>& body, int rows, int cols) {
  if (body.dim() != 3) throw UnsupportedError("mesh export needs dimension 3");
  Mesh mesh;
  const Eigen::MatrixXd grid = uv_sphere_grid(rows, cols);
  mesh.vertices.resize(3, grid.cols());
  mesh.normals.resize(3, grid.cols());
  for (Eigen::Index i = 0; i < grid.cols(); ++i) {
    const auto f = boundary_frame(body, grid.col(i));
    mesh.vertices.col(i) = values(f.y);
    mesh.normals.col(i) = values(f.n);
  }
  mesh.triangles = uv_sphere_triangles(rows, cols);
  return mesh;
}

template <class F>
Eigen::MatrixXd boundary_polyline(const ConvexBody<F>& body, int n) {
  if (body.dim() != 2) throw UnsupportedError("polyline export needs dimension 2");
  const auto rule = sphere_rule(2, n);
  Eigen::MatrixXd pts(2, n);
  for (int i = 0; i < n; ++i) pts.col(i) = values(map(body, rule.nodes.col(i)));
  return pts;
}

std::string polyline_csv(const Eigen::MatrixXd& pts);
std::string polyline_svg(const Eigen::MatrixXd& pts);
std::string mesh_obj(const Mesh& mesh);

}  // namespace convexnet
