#include "convexnet/pde.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace convexnet {

namespace {

double radical_inverse(int base, long long i) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

}  // namespace

// ---------------------------------------------------------------- RBF basis

RbfBasis::Active RbfBasis::active(const Point& x) const {
  Active out;
  const double inv_rho = 1.0 / rho;
  const double scale = -56.0 * inv_rho * inv_rho;
  for (int j = 0; j < kernel_count(); ++j) {
    Vec<double> diff = x - centers.col(j);
    const double r2 = diff.squaredNorm();
    if (r2 >= rho * rho) continue;
    const double q = std::sqrt(r2) * inv_rho;
    const double t = 1.0 - q;
    const double t2 = t * t;
    const double t5 = t2 * t2 * t;
    out.index.push_back(j);
    out.value.push_back(t5 * t * (35.0 * q * q + 18.0 * q + 3.0));
    out.grad.push_back(diff * (scale * t5 * (5.0 * q + 1.0)));
  }
  if (poly_degree >= 0) {
    const int base = kernel_count();
    out.index.push_back(base);
    out.value.push_back(1.0);
    out.grad.push_back(Vec<double>::Zero(dim));
    if (poly_degree >= 1)
      for (int a = 0; a < dim; ++a) {
        out.index.push_back(base + 1 + a);
        out.value.push_back(x[a]);
        out.grad.push_back(Vec<double>::Unit(dim, a));
      }
  }
  return out;
}

double RbfBasis::evaluate(const Eigen::VectorXd& coeffs, const Point& x) const {
  const auto act = active(x);
  double s = 0.0;
  for (std::size_t i = 0; i < act.index.size(); ++i) s += coeffs[act.index[i]] * act.value[i];
  return s;
}

Eigen::VectorXd RbfBasis::evaluate_gradient(const Eigen::VectorXd& coeffs, const Point& x) const {
  const auto act = active(x);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < act.index.size(); ++i) g += coeffs[act.index[i]] * act.grad[i];
  return g;
}

RbfBasis make_rbf_basis(int dim, int n_centers, int poly_degree, double support_factor) {
  if (dim < 2 || dim > kMaxDim) throw UnsupportedError("RBF basis supports dimensions 2 to 4");
  if (n_centers < 16) throw std::invalid_argument("RBF basis needs at least 16 centers");
  if (poly_degree < -1 || poly_degree > 1)
    throw std::invalid_argument("polynomial degree must be -1 (none), 0 or 1");
  if (support_factor == 0.0) support_factor = dim == 2 ? 6.0 : 4.0;
  if (!(support_factor > 0.0)) throw std::invalid_argument("support factor must be positive");
  const double h = std::pow(ball_volume(dim) / n_centers, 1.0 / dim);
  const int nb = std::max(
      8, static_cast<int>(std::lround(n_centers * (1.0 - std::pow(1.0 - 0.5 * h, dim)))));
  const int ni = n_centers - nb;
  RbfBasis basis;
  basis.dim = dim;
  basis.poly_degree = poly_degree;
  basis.centers.resize(dim, n_centers);
  basis.centers.leftCols(nb) = sphere_rule(dim, nb).nodes;
  static constexpr int kPrimes[] = {2, 3, 5, 7};
  const double r_max = 1.0 - 0.5 * h;
  long long i = 1;
  for (int k = 0; k < ni; ++i) {
    Point x(dim);
    for (int a = 0; a < dim; ++a) x[a] = 2.0 * radical_inverse(kPrimes[a], i) - 1.0;
    if (x.norm() <= r_max) basis.centers.col(nb + k++) = x;
  }
  for (int a = 0; a < n_centers; ++a)
    for (int b = a + 1; b < n_centers; ++b)
      if ((basis.centers.col(a) - basis.centers.col(b)).norm() <= 1e-6)
        throw std::logic_error("RBF centers are not separated");
  basis.spacing = h;
  basis.rho = support_factor * h;
  return basis;
}

// ---------------------------------------------------------- Galerkin solver

GalerkinSolution solve_galerkin(const GalerkinSystem& system, const RbfBasis& basis) {
  if (!system.K.allFinite() || !system.load.allFinite())
    throw SolverError("Galerkin system has non-finite entries", 0.0);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(system.K);
  const double rc = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(rc >= 1e-15))
    throw SolverError("Galerkin stiffness matrix is singular or indefinite (rcond " +
                          std::to_string(rc) + ")",
                      rc);
  GalerkinSolution sol{basis, ldlt.solve(system.load), rc};
  if (!sol.coeffs.allFinite()) throw SolverError("Galerkin solve produced non-finite values", rc);
  return sol;
}

// ------------------------------------------------------------------- MFS

double fundamental_solution(const Point& r) {
  const int d = static_cast<int>(r.size());
  const double n = r.norm();
  if (n == 0.0) throw DomainError("fundamental solution evaluated at its pole");
  if (d == 2) return -std::log(n) / (2.0 * std::numbers::pi);
  return std::pow(n, 2.0 - d) / (d * (d - 2.0) * ball_volume(d));
}

Eigen::VectorXd fundamental_solution_gradient(const Point& r) {
  const Vec<double> g = fundamental_solution_gradient<double>(Vec<double>(r));
  return g;
}

double MfsModel::harmonic(const Point& y) const {
  double s = coeffs[n];
  for (int j = 0; j < n; ++j) s += coeffs[j] * fundamental_solution(y - sources.col(j));
  return s;
}

Eigen::VectorXd MfsModel::harmonic_gradient(const Point& y) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
  for (int j = 0; j < n; ++j) g += coeffs[j] * fundamental_solution_gradient(y - sources.col(j));
  return g;
}

namespace detail {

Eigen::MatrixXd check_rotation(int dim) {
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(dim, dim);
  // Givens rotations in successive coordinate planes, angles unrelated to any node set.
  const double angles[] = {0.3719, 0.2113, 0.5417};
  for (int a = 0; a + 1 < dim; ++a) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Identity(dim, dim);
    const double c = std::cos(angles[a]), s = std::sin(angles[a]);
    G(a, a) = c;
    G(a, a + 1) = -s;
    G(a + 1, a) = s;
    G(a + 1, a + 1) = c;
    R = G * R;
  }
  return R;
}

Eigen::MatrixXd mfs_matrix(const Eigen::MatrixXd& points, const Eigen::MatrixXd& sources) {
  const Eigen::Index n = sources.cols();
  Eigen::MatrixXd M(points.cols(), n + 1);
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    for (Eigen::Index j = 0; j < n; ++j)
      M(k, j) = fundamental_solution(points.col(k) - sources.col(j));
    M(k, n) = 1.0;
  }
  return M;
}

}  // namespace detail

ad::ValueGrad mfs_normal_derivative_gradient(const MfsModel& model, const NetShape& shape,
                                             std::span<const double> theta, const Point& x_star) {
  const int d = shape.dim;
  const int n = model.n;
  const auto dbody = make_body(net_function<double>(shape, theta), model.kind);
  const Eigen::MatrixXd M = detail::mfs_matrix(model.fit_points, model.sources);
  const Eigen::Index K = M.rows();
  const Eigen::VectorXd& c = model.coeffs;

  // g = ∂Q/∂c with Q = Σⱼ cⱼ∇ψ(y* − sⱼ)·n* − y*₁n*₁.
  const auto fs = boundary_frame(dbody, x_star);
  const Point ys = values(fs.y);
  const Point ns = values(fs.n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n + 1);
  for (int j = 0; j < n; ++j) g[j] = fundamental_solution_gradient(Point(ys - model.sources.col(j))).dot(ns);

  // μ = (MᵀM)⁺g through the pivoted QR, ν = Mμ; columns beyond the numerical rank are dropped.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::Index rank = qr.rank();
  const Eigen::MatrixXd R =
      qr.matrixR().topLeftCorner(rank, rank).template triangularView<Eigen::Upper>();
  const Eigen::VectorXd pg = (qr.colsPermutation().transpose() * g).head(rank);
  Eigen::VectorXd z = R.transpose().triangularView<Eigen::Lower>().solve(pg);
  z = R.triangularView<Eigen::Upper>().solve(z);
  Eigen::VectorXd zfull = Eigen::VectorXd::Zero(n + 1);
  zfull.head(rank) = z;
  const Eigen::VectorXd mu = qr.colsPermutation() * zfull;
  const Eigen::VectorXd nu = M * mu;
  const Eigen::VectorXd r = (0.5 * model.fit_points.row(0).array().square()).matrix().transpose() - M * c;

  ad::ParameterTape tape(theta);
  const auto vbody = make_body(net_function<ad::Var>(shape, tape.params()), model.kind);
  ad::ValueGrad out(tape.size());

  // Fit points: σ_k·z_k with σ_k = Σⱼ A_kj∇ψ(z_k − sⱼ) + ν_k z_k₁e₁, A_kj = r_kμⱼ − ν_k cⱼ.
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(d, n);
  for (Eigen::Index k = 0; k < K; ++k) {
    const Point zk = model.fit_points.col(k);
    Vec<double> sigma = Vec<double>::Zero(d);
    sigma[0] = nu[k] * zk[0];
    for (int j = 0; j < n; ++j) {
      const double A = r[k] * mu[j] - nu[k] * c[j];
      const Eigen::VectorXd gp = fundamental_solution_gradient(Point(zk - model.sources.col(j)));
      sigma += A * gp;
      tau.col(j) -= A * gp;
    }
    const Vec<ad::Var> zv = map(vbody, model.fit_ref.col(k));
    ad::Var s(0.0);
    for (int a = 0; a < d; ++a) s = s + zv[a] * sigma[a];
    tape.accumulate(s, 1.0, out);
  }
  // Sources: τⱼ·sⱼ plus the direct dependence of Q on sⱼ, y*, n* with c fixed.
  const auto fv = boundary_frame(vbody, x_star);
  ad::Var q = -fv.y[0] * fv.n[0];
  for (int j = 0; j < n; ++j) {
    const auto fj = boundary_frame(vbody, model.source_ref.col(j));
    const Vec<ad::Var> sj = detail::source_point<ad::Var>(model.kind, fj.y, fj.n, model.eps);
    const Vec<ad::Var> gp = fundamental_solution_gradient<ad::Var>(Vec<ad::Var>(fv.y - sj));
    q = q + c[j] * dot(gp, fv.n);
    for (int a = 0; a < d; ++a) q = q + sj[a] * tau(a, j);
  }
  tape.accumulate(q, 1.0, out);
  Eigen::VectorXd gy = model.harmonic_gradient(ys);
  gy[0] -= ys[0];
  out.value = gy.dot(ns);
  return out;
}

}  // namespace convexnet
