#pragma once

// Mesh-free PDE solvers on convex bodies.
//
// RBF-Galerkin: −Δu = f on Ω = φ(B), u = 0 on ∂Ω weakly (boundary penalty), solved
// on the reference ball with the pulled-back coefficient A = |det Dφ| Dφ⁻¹Dφ⁻ᵀ.
//
// Method of fundamental solutions for the torsion problem −Δu = 1, u|∂Ω = 0:
// Φ = u + y₁²/2 is harmonic with boundary data y₁²/2 and is approximated by
// Σⱼ cⱼ ψ(y − sⱼ) + c₀ with sources sⱼ outside Ω.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "convexnet/autodiff/value_grad.hpp"
#include "convexnet/errors.hpp"
#include "convexnet/geometry.hpp"
#include "convexnet/linalg.hpp"
#include "convexnet/quadrature.hpp"

namespace convexnet {

// ---------------------------------------------------------------- RBF basis

/// Wendland C⁴ kernel ψ(q) = (1−q)⁶(35q² + 18q + 3) for q < 1.
inline double wendland_c4(double q) {
  if (q >= 1.0) return 0.0;
  const double t = 1.0 - q;
  const double t2 = t * t;
  return t2 * t2 * t2 * (35.0 * q * q + 18.0 * q + 3.0);
}

/// Compactly supported kernels centered in B̄ plus polynomials of degree ≤ poly_degree.
/// Basis index order: centers first, then 1, x₁, …, x_d.
struct RbfBasis {
  int dim = 0;
  Eigen::MatrixXd centers;
  double rho = 0.0;
  double spacing = 0.0;  // h = (Vol(B)/#centers)^{1/d}
  int poly_degree = 1;

  int kernel_count() const { return static_cast<int>(centers.cols()); }
  int poly_count() const { return poly_degree < 0 ? 0 : poly_degree == 0 ? 1 : 1 + dim; }
  int size() const { return kernel_count() + poly_count(); }

  struct Active {
    std::vector<int> index;
    std::vector<double> value;
    std::vector<Vec<double>> grad;
  };
  /// Basis functions that do not vanish at x, with values and gradients.
  Active active(const Point& x) const;
  double evaluate(const Eigen::VectorXd& coeffs, const Point& x) const;
  Eigen::VectorXd evaluate_gradient(const Eigen::VectorXd& coeffs, const Point& x) const;
};

/// Halton points in the ball (bases 2, 3, 5, 7) plus a boundary layer of
/// sphere-rule nodes. The boundary takes the share of centers falling in a
/// shell of half the mean spacing h. Support radius ρ = support_factor·h;
/// 0 selects 6 in 2D and 4 otherwise.
RbfBasis make_rbf_basis(int dim, int n_centers, int poly_degree = 1, double support_factor = 0.0);

/// Penalty 10³/h: the boundary trace of u then scales like h·10⁻³.
inline double default_penalty(const RbfBasis& basis) { return 1e3 / basis.spacing; }

// ---------------------------------------------------------- Galerkin solver

struct GalerkinSystem {
  Eigen::MatrixXd K;
  Eigen::VectorXd load;
  double alpha = 0.0;
};

struct GalerkinSolution {
  RbfBasis basis;
  Eigen::VectorXd coeffs;
  double rcond = 0.0;

  /// u(φ(x)) at a reference point x ∈ B̄.
  double reference_value(const Point& x) const { return basis.evaluate(coeffs, x); }
};

namespace detail {

/// Pulled-back Jacobian and coefficient matrix A = |det J| J⁻¹J⁻ᵀ at x.
template <class S>
struct Pullback {
  Vec<S> y;
  S jac;
  Mat<S> A;
};

template <class F>
Pullback<typename F::Scalar> pullback(const ConvexBody<F>& body, const Point& x) {
  using S = typename F::Scalar;
  using std::abs;
  const int d = body.dim();
  auto m = local_map(body, x, false);
  SmallLu<S> lu(m.J);
  const S det = lu.determinant();
  if (lu.singular() || std::abs(value_of(det)) < 1e-12)
    throw DegenerateMapError("singular boundary-map Jacobian at a quadrature node");
  const Mat<S> Jinv = lu.inverse();
  Pullback<S> p;
  p.y = std::move(m.y);
  p.jac = abs(det);
  p.A.resize(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      S s(0.0);
      for (int k = 0; k < d; ++k) s = s + Jinv(a, k) * Jinv(b, k);
      p.A(a, b) = p.jac * s;
      p.A(b, a) = p.A(a, b);
    }
  return p;
}

}  // namespace detail

/// Assembles Kᵢⱼ = ∫_B ∇φᵢ·A∇φⱼ + α∫_{∂B} φᵢφⱼ and f̄ᵢ = ∫_B |det Dφ| (f∘φ) φᵢ.
template <class F, class Source>
GalerkinSystem assemble_galerkin(const ConvexBody<F>& body, const Source& f, double alpha,
                                 const RbfBasis& basis, const BallRule& ball,
                                 const SphereRule& sphere) {
  if (!(alpha > 0.0)) throw std::invalid_argument("penalty alpha must be positive");
  const int n = basis.size();
  const int d = body.dim();
  GalerkinSystem sys;
  sys.alpha = alpha;
  sys.K = Eigen::MatrixXd::Zero(n, n);
  sys.load = Eigen::VectorXd::Zero(n);
  for (Eigen::Index q = 0; q < ball.size(); ++q) {
    const Point x = ball.nodes.col(q);
    const auto pb = detail::pullback(body, x);
    const double w = ball.weights[q];
    const double fy = value_of(f(pb.y));
    if (!std::isfinite(fy)) throw std::runtime_error("source term is not finite at a node");
    const auto act = basis.active(x);
    const int na = static_cast<int>(act.index.size());
    std::vector<Vec<double>> Ag(na);
    for (int i = 0; i < na; ++i) Ag[i] = pb.A * act.grad[i];
    for (int i = 0; i < na; ++i) {
      const int I = act.index[i];
      sys.load[I] += w * pb.jac * fy * act.value[i];
      for (int j = i; j < na; ++j) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += act.grad[j][a] * Ag[i][a];
        sys.K(I, act.index[j]) += w * s;
      }
    }
  }
  for (Eigen::Index q = 0; q < sphere.size(); ++q) {
    const auto act = basis.active(sphere.nodes.col(q));
    const double w = alpha * sphere.weights[q];
    for (std::size_t i = 0; i < act.index.size(); ++i)
      for (std::size_t j = i; j < act.index.size(); ++j)
        sys.K(act.index[i], act.index[j]) += w * act.value[i] * act.value[j];
  }
  // Only one triangle was filled per (i, j) pair; the order of indices in the
  // active list decides which one.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double s = sys.K(i, j) + sys.K(j, i);
      sys.K(i, j) = s;
      sys.K(j, i) = s;
    }
  return sys;
}

/// Symmetric factorization of K. Throws SolverError (with the reciprocal
/// condition estimate) if the factorization fails or rcond < 1e-15.
GalerkinSolution solve_galerkin(const GalerkinSystem& system, const RbfBasis& basis);

/// ∫_Ω u = ∫_B u_h(x)|det Dφ(x)| dx.
template <class F>
double torsional_rigidity(const ConvexBody<F>& body, const GalerkinSolution& sol,
                          const BallRule& ball) {
  double total = 0.0;
  for (Eigen::Index q = 0; q < ball.size(); ++q) {
    const Point x = ball.nodes.col(q);
    total += ball.weights[q] * value_of(jacobian_determinant(body, x)) * sol.reference_value(x);
  }
  return total;
}

struct GalerkinResult {
  GalerkinSolution solution;
  ad::ValueGrad integral;  // ∫_Ω u and its parameter gradient
};

/// Solves the Poisson problem on the net body with parameters θ and returns ∫_Ω u
/// with its θ-gradient. With Kū = f̄ and J = cᵀū, cᵢ = ∫_B |det Dφ| φᵢ, the adjoint
/// λ = K⁻¹c gives dJ = dcᵀū + λᵀ(df̄ − dK ū), accumulated node by node on the tape.
template <class Source>
GalerkinResult galerkin_integral(const NetShape& shape, BodyKind kind,
                                 std::span<const double> theta, const Source& f, double alpha,
                                 const RbfBasis& basis, const BallRule& ball,
                                 const SphereRule& sphere) {
  const auto dbody = make_body(net_function<double>(shape, theta), kind);
  const auto sys = assemble_galerkin(dbody, f, alpha, basis, ball, sphere);
  GalerkinResult res{solve_galerkin(sys, basis), {}};
  const int n = basis.size();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (Eigen::Index q = 0; q < ball.size(); ++q) {
    const Point x = ball.nodes.col(q);
    const auto act = basis.active(x);
    const double jac = value_of(jacobian_determinant(dbody, x));
    for (std::size_t i = 0; i < act.index.size(); ++i)
      c[act.index[i]] += ball.weights[q] * jac * act.value[i];
  }
  const Eigen::VectorXd lambda =
      Eigen::LDLT<Eigen::MatrixXd>(sys.K).solve(c);

  ad::ParameterTape tape(theta);
  const auto vbody = make_body(net_function<ad::Var>(shape, tape.params()), kind);
  res.integral = ad::ValueGrad(tape.size());
  for (Eigen::Index q = 0; q < ball.size(); ++q) {
    const Point x = ball.nodes.col(q);
    const double u = res.solution.basis.evaluate(res.solution.coeffs, x);
    const double lam = basis.evaluate(lambda, x);
    const Eigen::VectorXd gu = basis.evaluate_gradient(res.solution.coeffs, x);
    const Eigen::VectorXd gl = basis.evaluate_gradient(lambda, x);
    const auto pb = detail::pullback(vbody, x);
    ad::Var term = pb.jac * u + pb.jac * f(pb.y) * lam;
    for (int a = 0; a < shape.dim; ++a)
      for (int b = 0; b < shape.dim; ++b) term = term - pb.A(a, b) * (gl[a] * gu[b]);
    // Lagrangian cᵀū + λᵀ(f̄ − Kū); the penalty part of K does not depend on θ.
    tape.accumulate(term, ball.weights[q], res.integral);
  }
  // Report the value of J itself rather than the Lagrangian.
  res.integral.value = c.dot(res.solution.coeffs);
  return res;
}

// ------------------------------------------------------------------- MFS

/// Free-space fundamental solution of −Δ: −log‖r‖/(2π) in 2D,
/// ‖r‖^{2−d}/(d(d−2)ω_d) for d ≥ 3 (ω_d = volume of the unit ball).
double fundamental_solution(const Point& r);
Eigen::VectorXd fundamental_solution_gradient(const Point& r);

template <class S>
Vec<S> fundamental_solution_gradient(const Vec<S>& r) {
  const int d = static_cast<int>(r.size());
  const S r2 = dot(r, r);
  S scale;
  if (d == 2) {
    scale = S(-1.0 / (2.0 * std::numbers::pi)) / r2;
  } else {
    using std::pow;
    const double c = -(d - 2.0) / (d * (d - 2.0) * ball_volume(d));
    scale = c * pow(r2, -0.5 * d);
  }
  Vec<S> g(d);
  for (int a = 0; a < d; ++a) g[a] = scale * r[a];
  return g;
}

struct MfsOptions {
  int n0 = 64;
  double eps0 = 0.3;
  double tol = 1e-5;
  int max_rounds = 6;
  double eps_factor = 0.7;
  int fit_factor = 8;
  int check_factor = 32;
};

struct MfsModel {
  int dim = 0;
  BodyKind kind = BodyKind::Gauge;
  int n = 0;
  double eps = 0.0;
  Eigen::MatrixXd source_ref;  // x̃ⱼ on ∂B
  Eigen::MatrixXd sources;     // sⱼ
  Eigen::MatrixXd fit_ref;     // x_k on ∂B
  Eigen::MatrixXd fit_points;  // z_k = φ(x_k)
  Eigen::VectorXd coeffs;      // n kernel coefficients, then the constant
  Eigen::VectorXd fit_residual;  // b − Mc on the fit points
  double residual = std::numeric_limits<double>::infinity();
  int rounds = 0;

  double harmonic(const Point& y) const;
  Eigen::VectorXd harmonic_gradient(const Point& y) const;
};

class MfsConvergenceError : public SolverError {
 public:
  MfsConvergenceError(const std::string& what, MfsModel best)
      : SolverError(what, best.residual), best_(std::move(best)) {}
  const MfsModel& best() const { return best_; }

 private:
  MfsModel best_;
};

namespace detail {

/// Fixed rotation applied to the residual-check nodes so they do not coincide
/// with fit or source nodes.
Eigen::MatrixXd check_rotation(int dim);

/// Source point for the boundary node x with unit normal n: scaled along the
/// ray for gauge bodies (p(s) = 1+ε exactly), pushed along the normal by ε·(y·n)
/// for support bodies.
template <class S>
Vec<S> source_point(BodyKind kind, const Vec<S>& y, const Vec<S>& n, double eps) {
  if (kind == BodyKind::Gauge) return y * S(1.0 + eps);
  const S h = dot(y, n);
  return y + n * (h * eps);
}

Eigen::MatrixXd mfs_matrix(const Eigen::MatrixXd& points, const Eigen::MatrixXd& sources);

}  // namespace detail

/// One least-squares fit with n sources at offset eps.
template <class F>
MfsModel fit_mfs(const ConvexBody<F>& body, int n, double eps, const MfsOptions& opt) {
  const int d = body.dim();
  MfsModel m;
  m.dim = d;
  m.kind = body.kind;
  m.n = n;
  m.eps = eps;
  const auto src_rule = sphere_rule(d, n);
  m.source_ref = src_rule.nodes;
  m.sources.resize(d, n);
  for (int j = 0; j < n; ++j) {
    const auto f = boundary_frame(body, src_rule.nodes.col(j));
    m.sources.col(j) = detail::source_point<double>(body.kind, values(f.y), values(f.n), eps);
  }
  const auto fit_rule = sphere_rule(d, opt.fit_factor * n);
  m.fit_ref = fit_rule.nodes;
  m.fit_points.resize(d, fit_rule.size());
  for (Eigen::Index k = 0; k < fit_rule.size(); ++k)
    m.fit_points.col(k) = values(map(body, fit_rule.nodes.col(k)));
  const Eigen::MatrixXd M = detail::mfs_matrix(m.fit_points, m.sources);
  const Eigen::VectorXd b = 0.5 * m.fit_points.row(0).array().square().matrix().transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  m.coeffs = qr.solve(b);
  m.fit_residual = b - M * m.coeffs;
  // Independent, denser check set.
  const Eigen::MatrixXd check = detail::check_rotation(d) * sphere_rule(d, opt.check_factor * n).nodes;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < check.cols(); ++k) {
    const Point y = values(map(body, check.col(k)));
    worst = std::max(worst, std::abs(m.harmonic(y) - 0.5 * y[0] * y[0]));
  }
  m.residual = worst;
  return m;
}

/// Fits with (n0, eps0); while the check residual exceeds tol, doubles n and
/// multiplies eps by eps_factor, for at most max_rounds fits.
template <class F>
MfsModel solve_torsion_mfs(const ConvexBody<F>& body, const MfsOptions& opt) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("MFS tolerance must be positive");
  std::optional<MfsModel> best;
  int n = opt.n0;
  double eps = opt.eps0;
  for (int round = 1; round <= opt.max_rounds; ++round) {
    MfsModel m = fit_mfs(body, n, eps, opt);
    m.rounds = round;
    if (!best || m.residual < best->residual) best = m;
    if (m.residual <= opt.tol) return m;
    n *= 2;
    eps *= opt.eps_factor;
  }
  throw MfsConvergenceError("MFS residual " + std::to_string(best->residual) +
                                " above tolerance after " + std::to_string(opt.max_rounds) +
                                " rounds",
                            *best);
}

/// u(y) = Φ(y) − y₁²/2. For gauge bodies, points outside the body are rejected.
template <class F>
double torsion_eval(const MfsModel& model, const ConvexBody<F>& body, const Point& y) {
  if (body.kind == BodyKind::Gauge && y.norm() > 0.0 && value_of(body.fn.value(y)) > 1.0 + 1e-9)
    throw DomainError("evaluation point outside the body");
  return model.harmonic(y) - 0.5 * y[0] * y[0];
}

/// ∂ₙu at φ(x), x ∈ ∂B.
template <class F>
double torsion_normal_derivative(const MfsModel& model, const ConvexBody<F>& body, const Point& x) {
  const auto f = boundary_frame(body, x);
  const Point y = values(f.y);
  Eigen::VectorXd g = model.harmonic_gradient(y);
  g[0] -= y[0];
  return g.dot(values(f.n));
}

/// ∫_Ω u via the reference ball.
template <class F>
double torsional_rigidity(const ConvexBody<F>& body, const MfsModel& model, const BallRule& ball) {
  double total = 0.0;
  for (Eigen::Index q = 0; q < ball.size(); ++q) {
    const Point x = ball.nodes.col(q);
    const auto m = local_map(body, x, false);
    const Point y = values(m.y);
    SmallLu<double> lu(values(m.J));
    total += ball.weights[q] * std::abs(lu.determinant()) * (model.harmonic(y) - 0.5 * y[0] * y[0]);
  }
  return total;
}

/// Parameter gradient of ∂ₙu(φ(x*)) for the model fitted on the body with
/// parameters θ (fit kept at its n and eps). Differentiates the least-squares
/// solution c = M⁺b with respect to fit points, sources, φ(x*) and n(x*).
ad::ValueGrad mfs_normal_derivative_gradient(const MfsModel& model, const NetShape& shape,
                                             std::span<const double> theta, const Point& x_star);

/// Samples u on a regular grid of the bounding box (points outside Ω are skipped);
/// CSV rows x1,…,xd,u.
template <class F>
std::string solution_csv(const ConvexBody<F>& body, const std::function<double(const Point&)>& u,
                         int resolution) {
  if (body.kind != BodyKind::Gauge)
    throw UnsupportedError("solution sampling needs a gauge body for the inside test");
  const int d = body.dim();
  const auto rule = sphere_rule(d, d == 2 ? 512 : 2048);
  double R = 0.0;
  for (Eigen::Index i = 0; i < rule.size(); ++i)
    R = std::max(R, 1.0 / value_of(body.fn.value(rule.nodes.col(i))));
  std::ostringstream out;
  for (int a = 0; a < d; ++a) out << "x" << a + 1 << ",";
  out << "u\n";
  std::vector<int> idx(d, 0);
  char buf[40];
  for (;;) {
    Point y(d);
    for (int a = 0; a < d; ++a) y[a] = -R + 2.0 * R * idx[a] / (resolution - 1);
    if (y.norm() == 0.0 || value_of(body.fn.value(y)) <= 1.0) {
      for (int a = 0; a < d; ++a) {
        std::snprintf(buf, sizeof buf, "%.10g,", y[a]);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, "%.10g\n", u(y));
      out << buf;
    }
    int a = 0;
    while (a < d && ++idx[a] == resolution) idx[a++] = 0;
    if (a == d) break;
  }
  return out.str();
}

}  // namespace convexnet
