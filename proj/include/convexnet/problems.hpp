#pragma once

// Objectives and metrics over net-parametrized bodies. Differentiable losses
// take the flat parameter vector θ and return value and θ-gradient.

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "convexnet/autodiff/value_grad.hpp"
#include "convexnet/geometry.hpp"
#include "convexnet/net.hpp"
#include "convexnet/oracles.hpp"
#include "convexnet/pde.hpp"
#include "convexnet/quadrature.hpp"

namespace convexnet {

// ------------------------------------------------------------------ targets

/// Boundary point φ(x) of a target body for x ∈ ∂B, with the surface Jacobian
/// (dS = surf_jac dσ).
struct BoundarySample {
  Point y;
  double surf_jac = 0.0;
};

/// A reference body given by its boundary parametrization and gauge.
struct Target {
  std::string name;
  int dim = 0;
  std::function<BoundarySample(const Point&)> boundary;
  std::function<double(const Point&)> gauge;
};

/// Target from a smooth sublinear function used as a gauge.
template <class F>
Target smooth_target(std::string name, F gauge_fn) {
  auto body = make_body(std::move(gauge_fn), BodyKind::Gauge);
  Target t;
  t.name = std::move(name);
  t.dim = body.dim();
  t.boundary = [body](const Point& x) {
    const auto f = boundary_frame(body, x);
    return BoundarySample{values(f.y), value_of(f.surf_jac)};
  };
  t.gauge = [body](const Point& y) { return value_of(body.fn.value(y)); };
  return t;
}

/// Radial parametrization y = x/g_P(x); on the facet with normal w,
/// dS = ‖w‖ g_P(x)^{-d} dσ.
Target polytope_target(const Polytope& P);

/// "ball[:r]", "ellipsoid:a,b[,c…]", or any polytope spec.
Target make_target(const std::string& spec, int dim);

/// "cube", "octahedron" (alias "cross-polytope"), "simplex", "polygon:n".
Polytope make_polytope(const std::string& spec, int dim);

// ---------------------------------------------------------------- noisy fit

struct FitDataset {
  Eigen::MatrixXd samples;  // d×n
  std::string target;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// xᵢ uniform on ∂B, yᵢ = target boundary point + N(0, σ²) per component.
FitDataset generate_noisy_samples(const Target& target, int n, double sigma, std::uint64_t seed);

/// Σᵢ (p_θ(yᵢ) − 1)² with its θ-gradient in closed form. Samples at the
/// origin are skipped and counted in `skipped`.
ad::ValueGrad fit_loss(const NetShape& shape, std::span<const double> theta, const FitDataset& data,
                       int* skipped = nullptr);

/// ‖p_θ − 1‖_{L²(∂Ω_target)} by quadrature over n mapped sphere nodes.
double accuracy_l2(const NetFunction<double>& body_gauge, const Target& target, int n);

// ------------------------------------------------- volume and surface terms

ad::ValueGrad volume_vg(const NetShape& shape, BodyKind kind, std::span<const double> theta,
                        const BallRule& rule);
ad::ValueGrad surface_area_vg(const NetShape& shape, BodyKind kind, std::span<const double> theta,
                              const SphereRule& rule);

/// c_d·Per/Vol^{(d−1)/d} − 1 with c_d = (d·Vol(B)^{1/d})⁻¹.
template <class F>
double isoperimetric_deficit(const ConvexBody<F>& body, const BallRule& ball, const SphereRule& sphere) {
  const int d = body.dim();
  const double vol = value_of(volume(body, ball));
  const double per = value_of(surface_area(body, sphere));
  const double cd = 1.0 / (d * std::pow(ball_volume(d), 1.0 / d));
  return cd * per / std::pow(vol, (d - 1.0) / d) - 1.0;
}

/// Vol(Ω)·Vol(Ω°) using the same net as gauge (body) and support (polar).
ad::ValueGrad mahler_volume(const NetShape& shape, std::span<const double> theta, const BallRule& rule);

template <class F>
double mahler_volume(const ConvexBody<F>& body, const BallRule& rule) {
  return value_of(volume(body, rule)) * value_of(volume(polar_body(body), rule));
}

// ------------------------------------------------------------- PDE losses

struct GalerkinConfig {
  int centers = 300;
  double alpha = 0.0;  // 0 selects default_penalty(basis)
  int radial_n = kDefaultRadialN;
  int sphere_n = 0;    // 0 selects default_sphere_n(d)
};

/// Galerkin data fixed across an optimization: basis and rules.
struct GalerkinSetup {
  RbfBasis basis;
  BallRule ball;
  SphereRule sphere;
  double alpha = 0.0;
};
GalerkinSetup make_galerkin_setup(int dim, const GalerkinConfig& cfg);

/// J(Ω) = ∫_Ω u with −Δu = f, u|∂Ω = 0.
template <class Source>
ad::ValueGrad poisson_objective(const NetShape& shape, BodyKind kind, std::span<const double> theta,
                                const Source& f, const GalerkinSetup& setup) {
  return galerkin_integral(shape, kind, theta, f, setup.alpha, setup.basis, setup.ball, setup.sphere)
      .integral;
}

struct UnitSource {
  template <class S>
  S operator()(const Vec<S>&) const {
    return S(1.0);
  }
};

/// T/Vol^{(d+2)/d}: scale invariant, maximized by the ball.
ad::ValueGrad saint_venant_ratio(const NetShape& shape, BodyKind kind, std::span<const double> theta,
                                 const GalerkinSetup& setup);

struct TorsionGradientValues {
  ad::ValueGrad normal_derivative;  // |∂ₙu(φ(x*))|
  ad::ValueGrad volume;
  ad::ValueGrad perimeter;
  ad::ValueGrad j_vol;  // |∂ₙu| / Vol^{1/d}
  ad::ValueGrad j_per;  // |∂ₙu| / Per^{1/(d−1)}
  MfsModel model;
};

/// MFS torsion solve and the two scale-invariant ratios at φ(x*).
TorsionGradientValues torsion_gradient_objectives(const NetShape& shape, BodyKind kind,
                                                  std::span<const double> theta, const Point& x_star,
                                                  const MfsOptions& mfs, const BallRule& ball,
                                                  const SphereRule& sphere);

// ---------------------------------------------------------------- Minkowski

/// Gaussian curvature of the ellipsoid with semi-axes `axes` at the boundary
/// point with outer normal u: h(u)^{d+1}/(Πaᵢ)², h(u) = √(Σ aᵢ²uᵢ²).
double ellipsoid_curvature(const Eigen::VectorXd& axes, const Point& u);

/// ∫_{∂B} ((κ_θ(u) − g(u))/g(u))² du for the support-parametrized net, where
/// κ_θ(u) is the Gaussian curvature at φ(u) (normal u). g is sampled at the rule nodes.
ad::ValueGrad minkowski_loss(const NetShape& shape, std::span<const double> theta,
                             const Eigen::VectorXd& g_nodes, const SphereRule& rule);

/// √(loss/|∂B|), the relative L² curvature error.
double minkowski_relative_error(double loss, const SphereRule& rule);

// ---------------------------------------------------------------- UAT check

struct UatRow {
  double beta = 0.0;
  double hausdorff = 0.0;
  double max_gap = 0.0;  // sup over samples of |p_net − p_P|
  double bound = 0.0;    // β log m
};

/// Nets built from the polytope for each β; the function gap is measured on
/// n sphere samples and the Hausdorff estimate on the same count.
std::vector<UatRow> uat_harness(const Polytope& P, BodyKind kind, const std::vector<double>& betas,
                                int n);

// --------------------------------------------------------------- statistics

struct QuantileSummary {
  double key = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  int runs = 0;
  int failures = 0;
};

/// Runs `run(seed)` for seeds base_seed, base_seed+1, …; runs that throw or
/// return non-finite values are counted as failures and excluded from the
/// quantiles. With threads > 1 runs execute concurrently; results are gathered
/// by seed, so the summary does not depend on the thread count.
QuantileSummary run_statistics(double key, int repeats, std::uint64_t base_seed,
                               const std::function<double(std::uint64_t)>& run, int threads = 1);

/// Linear-interpolation quantile (type 7) of unsorted values.
double quantile(std::vector<double> values, double q);

std::string statistics_csv(const std::vector<QuantileSummary>& rows, const std::string& key_name);

// ------------------------------------------------------------------ metrics

/// Named metrics written as "key = value" lines in insertion order.
class MetricsReport {
 public:
  void set(const std::string& key, double value);
  double get(const std::string& key) const;
  bool has(const std::string& key) const;
  const std::vector<std::pair<std::string, double>>& entries() const { return entries_; }
  std::string to_text() const;
  static MetricsReport parse(const std::string& text);

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

}  // namespace convexnet
