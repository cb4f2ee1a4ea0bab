#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convexnet/errors.hpp"
#include "convexnet/linalg.hpp"

namespace convexnet {

struct SphereRule;

/// Local Taylor data of a sublinear function at a point, up to `order`.
/// third[k] holds ∂ₖ∇²p.
template <class S>
struct Derivatives {
  int order = 0;
  S value{};
  Vec<S> grad;
  Mat<S> hess;
  std::array<Mat<S>, kMaxDim> third;
};

/// The sublinear network p(x) = β‖x‖·LSE(Wᵀx/‖x‖) with β = exp(log_beta).
/// W is d×m, one column per direction.
struct SublinearNet {
  int dim = 0;
  int directions = 0;
  double log_beta = 0.0;
  Eigen::MatrixXd W;

  SublinearNet() = default;
  SublinearNet(double log_beta_, Eigen::MatrixXd W_)
      : dim(static_cast<int>(W_.rows())),
        directions(static_cast<int>(W_.cols())),
        log_beta(log_beta_),
        W(std::move(W_)) {}

  double beta() const { return std::exp(log_beta); }
  std::size_t parameter_count() const { return 1 + static_cast<std::size_t>(dim) * directions; }

  /// θ = (log β, W column by column). Length 1 + d·m.
  std::vector<double> flatten() const;
  /// Inverse of flatten for a net of the given shape.
  static SublinearNet unflatten(int dim, int directions, std::span<const double> theta);
};

/// Finite group of orthogonal matrices acting on ℝᵈ.
class SymmetryGroup {
 public:
  SymmetryGroup() = default;
  /// Validates closure, orthogonality and presence of the identity (tolerance 1e-12
  /// on products, orthogonality), throwing std::invalid_argument otherwise.
  explicit SymmetryGroup(std::vector<Eigen::MatrixXd> elements);

  static SymmetryGroup trivial(int dim);
  /// Rotations of the plane by multiples of 2π/n.
  static SymmetryGroup cyclic_rotations(int n);

  const std::vector<Eigen::MatrixXd>& elements() const { return elements_; }
  std::size_t order() const { return elements_.size(); }
  int dim() const { return elements_.empty() ? 0 : static_cast<int>(elements_.front().rows()); }
  bool is_trivial() const { return elements_.size() <= 1; }

 private:
  std::vector<Eigen::MatrixXd> elements_;
};

/// Frame-averaged net p^G(x) = (1/|G|) Σ_g p(g·x).
struct SymmetrizedNet {
  SublinearNet base;
  SymmetryGroup group;
};

/// Network parameters in an arbitrary scalar type (double for evaluation, ad::Var
/// for parameter gradients).
template <class S>
struct NetParams {
  S log_beta{};
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> W;

  int dim() const { return static_cast<int>(W.rows()); }
  int directions() const { return static_cast<int>(W.cols()); }

  static NetParams from_flat(int dim, int directions, std::span<const S> theta) {
    NetParams p;
    p.log_beta = theta[0];
    p.W.resize(dim, directions);
    std::size_t k = 1;
    for (int j = 0; j < directions; ++j)
      for (int i = 0; i < dim; ++i) p.W(i, j) = theta[k++];
    return p;
  }
};

inline NetParams<double> params_of(const SublinearNet& net) {
  return {net.log_beta, net.W};
}

namespace detail {

inline void require_nonzero(const Point& x) {
  if (!x.allFinite()) throw DomainError("non-finite evaluation point");
  if (x.norm() < 1e-12) throw DomainError("evaluation point within 1e-12 of the origin");
}

/// Local jet of the net at a unit vector u. The 1-homogeneous extension
/// h(x) = ‖x‖ f(x/‖x‖) of f = LSE∘Wᵀ has, at u,
///   ∇h  = g + (f − u·g) u,              g = ∇f(u)
///   ∇²h = P F P + (f − u·g) P,          P = I − uuᵀ, F = ∇²f(u)
/// and the third derivative follows by differentiating the Hessian formula.
/// The LSE derivatives are the softmax cumulants of the directions.
template <class S>
Derivatives<S> lse_at_unit(const NetParams<S>& p, const Point& u, int order) {
  using std::exp;
  using std::log;
  const int d = p.dim();
  const int m = p.directions();
  Derivatives<S> out;
  out.order = order;

  std::vector<S> z(m);
  double zmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    S s = p.W(0, i) * u[0];
    for (int a = 1; a < d; ++a) s = s + p.W(a, i) * u[a];
    z[i] = s;
    zmax = std::max(zmax, value_of(s));
  }
  std::vector<S> pi(m);
  S total(0.0);
  for (int i = 0; i < m; ++i) {
    pi[i] = exp(z[i] - zmax);
    total = total + pi[i];
  }
  const S f = log(total) + zmax;
  const S beta = exp(p.log_beta);
  out.value = beta * f;
  if (order < 1) return out;

  const S inv_total = S(1.0) / total;
  for (int i = 0; i < m; ++i) pi[i] = pi[i] * inv_total;
  Vec<S> g(d);
  for (int a = 0; a < d; ++a) {
    S s(0.0);
    for (int i = 0; i < m; ++i) s = s + pi[i] * p.W(a, i);
    g[a] = s;
  }
  S ug(0.0);
  for (int a = 0; a < d; ++a) ug = ug + g[a] * u[a];
  const S c = f - ug;
  out.grad.resize(d);
  for (int a = 0; a < d; ++a) out.grad[a] = beta * (g[a] + c * u[a]);
  if (order < 2) return out;

  // Centered directions and their weighted second moment F = Σ πᵢ cᵢcᵢᵀ.
  std::vector<Vec<S>> cen(m, Vec<S>(d));
  std::vector<Vec<S>> wcen(m, Vec<S>(d));
  for (int i = 0; i < m; ++i)
    for (int a = 0; a < d; ++a) {
      cen[i][a] = p.W(a, i) - g[a];
      wcen[i][a] = pi[i] * cen[i][a];
    }
  Mat<S> F(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      S s(0.0);
      for (int i = 0; i < m; ++i) s = s + wcen[i][a] * cen[i][b];
      F(a, b) = s;
      F(b, a) = s;
    }
  Mat<double> P(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) P(a, b) = (a == b ? 1.0 : 0.0) - u[a] * u[b];
  // PFP with P a constant matrix.
  Mat<S> FP(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      S s(0.0);
      for (int k = 0; k < d; ++k) s = s + F(a, k) * P(k, b);
      FP(a, b) = s;
    }
  Mat<S> hess_h(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      S s(0.0);
      for (int k = 0; k < d; ++k) s = s + P(a, k) * FP(k, b);
      s = s + c * P(a, b);
      hess_h(a, b) = s;
      hess_h(b, a) = s;
    }
  out.hess.resize(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out.hess(a, b) = beta * hess_h(a, b);
  if (order < 3) return out;

  // Third central moment, stored for a ≤ b ≤ c.
  auto idx = [d](int a, int b, int c) { return (a * d + b) * d + c; };
  std::vector<S> M3(static_cast<std::size_t>(d * d * d));
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      std::vector<S> wab(m);
      for (int i = 0; i < m; ++i) wab[i] = wcen[i][a] * cen[i][b];
      for (int c2 = b; c2 < d; ++c2) {
        S s(0.0);
        for (int i = 0; i < m; ++i) s = s + wab[i] * cen[i][c2];
        int k[3] = {a, b, c2};
        // All permutations share the value.
        M3[idx(k[0], k[1], k[2])] = s;
        M3[idx(k[0], k[2], k[1])] = s;
        M3[idx(k[1], k[0], k[2])] = s;
        M3[idx(k[1], k[2], k[0])] = s;
        M3[idx(k[2], k[0], k[1])] = s;
        M3[idx(k[2], k[1], k[0])] = s;
      }
    }
  // Fu = F u, used by dc = −uᵀFδ.
  Vec<S> Fu(d);
  for (int a = 0; a < d; ++a) {
    S s(0.0);
    for (int b = 0; b < d; ++b) s = s + F(a, b) * u[b];
    Fu[a] = s;
  }
  for (int k = 0; k < d; ++k) {
    Vec<double> delta(d);
    for (int a = 0; a < d; ++a) delta[a] = (a == k ? 1.0 : 0.0) - u[k] * u[a];
    Mat<double> dP(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) dP(a, b) = -(delta[a] * u[b] + u[a] * delta[b]);
    Mat<S> dF(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        S s(0.0);
        for (int e = 0; e < d; ++e)
          if (delta[e] != 0.0) s = s + M3[idx(a, b, e)] * delta[e];
        dF(a, b) = s;
        dF(b, a) = s;
      }
    S dc(0.0);
    for (int a = 0; a < d; ++a) dc = dc - Fu[a] * delta[a];
    Mat<S> T(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        S s = -u[k] * hess_h(a, b);
        for (int e = 0; e < d; ++e) {
          // dP F P + P F dP
          s = s + dP(a, e) * FP(e, b) + FP(e, a) * dP(e, b);
          // P dF P
          S pdf(0.0);
          for (int q = 0; q < d; ++q) pdf = pdf + P(a, q) * dF(q, e);
          s = s + pdf * P(e, b);
        }
        s = s + dc * P(a, b) + c * dP(a, b);
        T(a, b) = beta * s;
        T(b, a) = T(a, b);
      }
    out.third[k] = T;
  }
  return out;
}

/// Rescales a jet computed at u = x/r to the point x using homogeneity:
/// p(x) = r p(u), ∇p(x) = ∇p(u), ∇²p(x) = ∇²p(u)/r, ∇³p(x) = ∇³p(u)/r².
template <class S>
void rescale(Derivatives<S>& j, double r) {
  if (r == 1.0) return;
  j.value = j.value * r;
  if (j.order >= 2) j.hess = j.hess * S(1.0 / r);
  if (j.order >= 3)
    for (int k = 0; k < static_cast<int>(j.grad.size()); ++k) j.third[k] = j.third[k] * S(1.0 / (r * r));
}

/// Pulls back a jet of p evaluated at g·x to the jet of x ↦ p(g·x).
template <class S>
Derivatives<S> pull_back(const Derivatives<S>& j, const Eigen::MatrixXd& g) {
  const int d = static_cast<int>(g.rows());
  Derivatives<S> out;
  out.order = j.order;
  out.value = j.value;
  if (j.order < 1) return out;
  out.grad.resize(d);
  for (int a = 0; a < d; ++a) {
    S s(0.0);
    for (int b = 0; b < d; ++b) s = s + g(b, a) * j.grad[b];
    out.grad[a] = s;
  }
  if (j.order < 2) return out;
  auto congruence = [&](const Mat<S>& H) {
    Mat<S> tmp(d, d), r(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        S s(0.0);
        for (int c = 0; c < d; ++c) s = s + H(a, c) * g(c, b);
        tmp(a, b) = s;
      }
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        S s(0.0);
        for (int c = 0; c < d; ++c) s = s + g(c, a) * tmp(c, b);
        r(a, b) = s;
      }
    return r;
  };
  out.hess = congruence(j.hess);
  if (j.order < 3) return out;
  for (int k = 0; k < d; ++k) {
    Mat<S> mix(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        S s(0.0);
        for (int l = 0; l < d; ++l) s = s + g(l, k) * j.third[l](a, b);
        mix(a, b) = s;
      }
    out.third[k] = congruence(mix);
  }
  return out;
}

template <class S>
void accumulate_scaled(Derivatives<S>& acc, const Derivatives<S>& j, double w, bool first) {
  const auto d = j.grad.size();
  if (first) {
    acc.order = j.order;
    acc.value = j.value * w;
    if (j.order >= 1) acc.grad = j.grad * S(w);
    if (j.order >= 2) acc.hess = j.hess * S(w);
    if (j.order >= 3)
      for (Eigen::Index k = 0; k < d; ++k) acc.third[k] = j.third[k] * S(w);
    return;
  }
  acc.value = acc.value + j.value * w;
  if (j.order >= 1) acc.grad = acc.grad + j.grad * S(w);
  if (j.order >= 2) acc.hess = acc.hess + j.hess * S(w);
  if (j.order >= 3)
    for (Eigen::Index k = 0; k < d; ++k) acc.third[k] = acc.third[k] + j.third[k] * S(w);
}

}  // namespace detail

/// The network as a sublinear function, optionally frame-averaged over a group.
/// Holds the parameters by value in scalar type S.
template <class S>
class NetFunction {
 public:
  using Scalar = S;

  NetFunction(NetParams<S> params, const SymmetryGroup* group = nullptr)
      : params_(std::move(params)), group_(group && !group->is_trivial() ? group : nullptr) {}

  int dim() const { return params_.dim(); }
  const NetParams<S>& params() const { return params_; }
  const SymmetryGroup* group() const { return group_; }

  /// Jet of p at x up to `order` (0..3). x must be finite and ‖x‖ ≥ 1e-12.
  Derivatives<S> derivatives(const Point& x, int order) const {
    detail::require_nonzero(x);
    if (!group_) return at(x, order);
    Derivatives<S> acc;
    const double w = 1.0 / static_cast<double>(group_->order());
    bool first = true;
    for (const auto& g : group_->elements()) {
      const Point gx = g * x;
      detail::accumulate_scaled(acc, detail::pull_back(at(gx, order), g), w, first);
      first = false;
    }
    return acc;
  }

  S value(const Point& x) const {
    if (!x.allFinite()) throw DomainError("non-finite evaluation point");
    if (x.norm() == 0.0) return S(0.0);
    return derivatives(x, 0).value;
  }

 private:
  Derivatives<S> at(const Point& x, int order) const {
    const double r = x.norm();
    Derivatives<S> j = detail::lse_at_unit(params_, Point(x / r), order);
    detail::rescale(j, r);
    return j;
  }

  NetParams<S> params_;
  const SymmetryGroup* group_;
};

/// Shape of a flat parameter vector and the group used to symmetrize it.
struct NetShape {
  int dim = 0;
  int directions = 0;
  const SymmetryGroup* group = nullptr;
};

template <class S>
NetFunction<S> net_function(const NetShape& shape, std::span<const S> theta) {
  return {NetParams<S>::from_flat(shape.dim, shape.directions, theta), shape.group};
}

inline NetFunction<double> as_function(const SublinearNet& net) { return {params_of(net)}; }
inline NetFunction<double> as_function(const SymmetrizedNet& net) {
  return {params_of(net.base), &net.group};
}

// Evaluation entry points. Zero input returns 0 for eval only.
double eval(const SublinearNet& net, const Point& x);
Eigen::VectorXd eval_grad(const SublinearNet& net, const Point& x);
Eigen::MatrixXd eval_hess(const SublinearNet& net, const Point& x);
/// ∇³p(x)[a, b, ·].
Eigen::VectorXd eval_third(const SublinearNet& net, const Point& x, const Point& a, const Point& b);

double symmetrized_eval(const SymmetrizedNet& net, const Point& x);
Eigen::VectorXd symmetrized_grad(const SymmetrizedNet& net, const Point& x);

/// Net with parameters (β, β⁻¹[p₁…p_m]) approximating h_P(x) = maxᵢ pᵢ·x.
SublinearNet from_polytope_support(const Eigen::MatrixXd& vertices, double beta);
/// Net approximating g_P(x) = maxᵢ wᵢ·x for P = ∩{wᵢ·x ≤ 1}.
SublinearNet from_polytope_gauge(const Eigen::MatrixXd& normals, double beta);

/// Directions uniform on the sphere, β = 1, then normalize_scale.
SublinearNet random_net(int dim, int directions, std::uint64_t seed, const SphereRule& rule);

/// min over the rule's nodes of p ≥ eps.
bool validate_positive(const SublinearNet& net, const SphereRule& rule, double eps);
bool validate_positive(const SymmetrizedNet& net, const SphereRule& rule, double eps);
double min_on_nodes(const NetFunction<double>& fn, const SphereRule& rule);
/// Lower bound on min_on_nodes from LSE(z) ≥ max(max z, log m + mean z): one matrix
/// product, no exponentials. −1 if not finite.
double min_on_nodes_lower_bound(const SymmetrizedNet& net, const SphereRule& rule);

/// Rescales β so the quadrature mean of p over the sphere is 1.
SublinearNet normalize_scale(const SublinearNet& net, const SphereRule& rule);
SymmetrizedNet normalize_scale(const SymmetrizedNet& net, const SphereRule& rule);

// Text serialization: dimension, m, log β, W row-major, optional group matrices.
void write_net(std::ostream& out, const SublinearNet& net, const SymmetryGroup* group = nullptr);
SymmetrizedNet read_net(std::istream& in);
void save_net(const std::string& path, const SublinearNet& net, const SymmetryGroup* group = nullptr);
SymmetrizedNet load_net(const std::string& path);

}  // namespace convexnet
