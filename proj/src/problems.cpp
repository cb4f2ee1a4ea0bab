#include "convexnet/problems.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace convexnet {

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw std::invalid_argument("bad number '" + item + "' in target spec");
    out.push_back(v);
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------------ targets

Target polytope_target(const Polytope& P) {
  Target t;
  t.name = P.name;
  t.dim = P.dim();
  const int d = t.dim;
  t.boundary = [P, d](const Point& x) {
    const Eigen::VectorXd s = P.facets.transpose() * x;
    Eigen::Index k = 0;
    const double g = s.maxCoeff(&k);
    return BoundarySample{x / g, P.facets.col(k).norm() * std::pow(g, -d)};
  };
  t.gauge = [P](const Point& y) { return P.gauge(y); };
  return t;
}

Target make_target(const std::string& spec, int dim) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "ball") {
    const double r = args.empty() ? 1.0 : parse_numbers(args).at(0);
    if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
    return smooth_target(spec, QuadraticNorm::ball(dim, 1.0 / r));
  }
  if (name == "ellipsoid") {
    const auto a = parse_numbers(args);
    if (static_cast<int>(a.size()) != dim)
      throw std::invalid_argument("ellipsoid target needs " + std::to_string(dim) + " semi-axes");
    Eigen::VectorXd axes = Eigen::Map<const Eigen::VectorXd>(a.data(), dim);
    if (!(axes.minCoeff() > 0.0)) throw std::invalid_argument("ellipsoid semi-axes must be positive");
    return smooth_target(spec, QuadraticNorm::ellipsoid_gauge(axes));
  }
  return polytope_target(make_polytope(spec, dim));
}

Polytope make_polytope(const std::string& spec, int dim) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "cube") return cube(dim);
  if (name == "octahedron" || name == "cross-polytope") return cross_polytope(dim);
  if (name == "simplex") return regular_simplex(dim);
  if (name == "polygon") {
    if (dim != 2) throw UnsupportedError("polygon needs dimension 2");
    const auto n = parse_numbers(args);
    if (n.size() != 1 || n[0] < 3 || n[0] != std::floor(n[0]))
      throw std::invalid_argument("polygon needs an integer vertex count ≥ 3");
    return regular_polygon(static_cast<int>(n[0]));
  }
  throw std::invalid_argument("unknown shape '" + spec + "'");
}

// ---------------------------------------------------------------- noisy fit

FitDataset generate_noisy_samples(const Target& target, int n, double sigma, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample count must be at least 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  const int d = target.dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  FitDataset data{Eigen::MatrixXd(d, n), target.name, sigma, seed};
  // All directions first, then all noise: the same seed gives the same xᵢ for every σ.
  for (int i = 0; i < n; ++i) {
    Point x(d);
    do {
      for (int a = 0; a < d; ++a) x[a] = normal(rng);
    } while (x.norm() < 1e-12);
    data.samples.col(i) = target.boundary(x.normalized()).y;
  }
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a) data.samples(a, i) += sigma * normal(rng);
  return data;
}

ad::ValueGrad fit_loss(const NetShape& shape, std::span<const double> theta, const FitDataset& data,
                       int* skipped) {
  const int d = shape.dim;
  const int m = shape.directions;
  const auto P = NetParams<double>::from_flat(d, m, theta);
  const double beta = std::exp(P.log_beta);
  std::vector<Eigen::MatrixXd> group{Eigen::MatrixXd::Identity(d, d)};
  if (shape.group && !shape.group->is_trivial()) group = shape.group->elements();
  const double inv_g = 1.0 / static_cast<double>(group.size());

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < data.samples.cols(); ++i)
    if (data.samples.col(i).norm() >= 1e-12) keep.push_back(i);
  const auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd Y(d, n);
  for (Eigen::Index k = 0; k < n; ++k) Y.col(k) = data.samples.col(keep[static_cast<std::size_t>(k)]);
  const Eigen::RowVectorXd r = Y.colwise().norm();

  // Per group element: p_g = β r (max z + log Σ exp(z − max z)), z = Wᵀ(gy/r);
  // the softmax S_g gives ∂p_g/∂W = β (gy) S_gᵀ.
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(n);
  std::vector<Eigen::MatrixXd> soft;
  soft.reserve(group.size());
  for (const auto& g : group) {
    const Eigen::MatrixXd U = g * Y;
    Eigen::MatrixXd Z = P.W.transpose() * (U.array().rowwise() / r.array()).matrix();
    const Eigen::RowVectorXd zmax = Z.colwise().maxCoeff();
    // Terms below e^-50 of the max are under rounding; the clamp keeps exp out of
    // the subnormal range, which is several times slower once β is small.
    Z = (Z.rowwise() - zmax).array().max(-50.0).exp().matrix();
    const Eigen::RowVectorXd se = Z.colwise().sum();
    p.array() += beta * r.array() * (zmax.array() + se.array().log());
    soft.push_back(Z.array().rowwise() / se.array());
  }
  p *= inv_g;
  const Eigen::RowVectorXd res = p.array() - 1.0;

  ad::ValueGrad out(static_cast<Eigen::Index>(theta.size()));
  out.value = res.squaredNorm();
  out.grad[0] = 2.0 * res.dot(p);
  const Eigen::RowVectorXd c = (2.0 * beta * inv_g) * res;
  Eigen::MatrixXd dW = Eigen::MatrixXd::Zero(d, m);
  for (std::size_t k = 0; k < group.size(); ++k)
    dW.noalias() += (group[k] * Y).cwiseProduct(c.replicate(d, 1)) * soft[k].transpose();
  for (int j = 0; j < m; ++j)
    for (int a = 0; a < d; ++a) out.grad[1 + j * d + a] = dW(a, j);
  if (skipped) *skipped = static_cast<int>(data.samples.cols() - n);
  return out;
}

double accuracy_l2(const NetFunction<double>& body_gauge, const Target& target, int n) {
  const auto rule = sphere_rule(target.dim, n);
  double s = 0.0;
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const auto b = target.boundary(rule.nodes.col(i));
    const double e = body_gauge.value(b.y) - 1.0;
    s += rule.weights[i] * b.surf_jac * e * e;
  }
  return std::sqrt(s);
}

// ------------------------------------------------- volume and surface terms

ad::ValueGrad volume_vg(const NetShape& shape, BodyKind kind, std::span<const double> theta,
                        const BallRule& rule) {
  ad::ParameterTape tape(theta);
  const auto body = make_body(net_function<ad::Var>(shape, tape.params()), kind);
  ad::ValueGrad out(tape.size());
  const auto& sph = rule.sphere;
  for (Eigen::Index i = 0; i < sph.size(); ++i)
    tape.accumulate(volume_density(body, sph.nodes.col(i)), sph.weights[i], out);
  return out;
}

ad::ValueGrad surface_area_vg(const NetShape& shape, BodyKind kind, std::span<const double> theta,
                              const SphereRule& rule) {
  ad::ParameterTape tape(theta);
  const auto body = make_body(net_function<ad::Var>(shape, tape.params()), kind);
  ad::ValueGrad out(tape.size());
  for (Eigen::Index i = 0; i < rule.size(); ++i)
    tape.accumulate(boundary_frame(body, rule.nodes.col(i)).surf_jac, rule.weights[i], out);
  return out;
}

ad::ValueGrad mahler_volume(const NetShape& shape, std::span<const double> theta, const BallRule& rule) {
  return volume_vg(shape, BodyKind::Gauge, theta, rule) * volume_vg(shape, BodyKind::Support, theta, rule);
}

// ------------------------------------------------------------- PDE losses

GalerkinSetup make_galerkin_setup(int dim, const GalerkinConfig& cfg) {
  GalerkinSetup s;
  s.basis = make_rbf_basis(dim, cfg.centers);
  s.sphere = sphere_rule(dim, cfg.sphere_n > 0 ? cfg.sphere_n : default_sphere_n(dim));
  s.ball = ball_rule(dim, cfg.radial_n, s.sphere);
  s.alpha = cfg.alpha > 0.0 ? cfg.alpha : default_penalty(s.basis);
  return s;
}

ad::ValueGrad saint_venant_ratio(const NetShape& shape, BodyKind kind, std::span<const double> theta,
                                 const GalerkinSetup& setup) {
  const int d = shape.dim;
  const auto T = poisson_objective(shape, kind, theta, UnitSource{}, setup);
  const auto V = volume_vg(shape, kind, theta, setup.ball);
  return T * pow(V, -(d + 2.0) / d);
}

TorsionGradientValues torsion_gradient_objectives(const NetShape& shape, BodyKind kind,
                                                  std::span<const double> theta, const Point& x_star,
                                                  const MfsOptions& mfs, const BallRule& ball,
                                                  const SphereRule& sphere) {
  if (std::abs(x_star.norm() - 1.0) > 1e-10) throw DomainError("x_star must lie on the unit sphere");
  const int d = shape.dim;
  const auto body = make_body(net_function<double>(shape, theta), kind);
  TorsionGradientValues out;
  out.model = solve_torsion_mfs(body, mfs);
  out.normal_derivative = abs(mfs_normal_derivative_gradient(out.model, shape, theta, x_star));
  out.volume = volume_vg(shape, kind, theta, ball);
  out.perimeter = surface_area_vg(shape, kind, theta, sphere);
  out.j_vol = out.normal_derivative * pow(out.volume, -1.0 / d);
  out.j_per = out.normal_derivative * pow(out.perimeter, -1.0 / (d - 1.0));
  return out;
}

// ---------------------------------------------------------------- Minkowski

double ellipsoid_curvature(const Eigen::VectorXd& axes, const Point& u) {
  const double h = (axes.array() * u.array()).matrix().norm() / u.norm();
  const double prod = axes.prod();
  return std::pow(h, axes.size() + 1.0) / (prod * prod);
}

ad::ValueGrad minkowski_loss(const NetShape& shape, std::span<const double> theta,
                             const Eigen::VectorXd& g_nodes, const SphereRule& rule) {
  if (g_nodes.size() != rule.size()) throw std::invalid_argument("one target value per node required");
  if (!(g_nodes.minCoeff() > 0.0)) throw DomainError("target curvature must be positive at every node");
  ad::ParameterTape tape(theta);
  const auto body = make_body(net_function<ad::Var>(shape, tape.params()), BodyKind::Support);
  ad::ValueGrad out(tape.size());
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const ad::Var k = curvature_frame(body, rule.nodes.col(i)).gauss;
    const ad::Var e = (k - g_nodes[i]) / g_nodes[i];
    tape.accumulate(e * e, rule.weights[i], out);
  }
  return out;
}

double minkowski_relative_error(double loss, const SphereRule& rule) {
  return std::sqrt(loss / rule.weights.sum());
}

// ---------------------------------------------------------------- UAT check

std::vector<UatRow> uat_harness(const Polytope& P, BodyKind kind, const std::vector<double>& betas,
                                int n) {
  const int d = P.dim();
  const auto rule = sphere_rule(d, n);
  const bool gauge = kind == BodyKind::Gauge;
  const auto poly_body = make_body(PolytopeFunction(P, gauge), kind);
  std::vector<UatRow> rows;
  for (double beta : betas) {
    const SublinearNet net =
        gauge ? from_polytope_gauge(P.facets, beta) : from_polytope_support(P.vertices, beta);
    const auto fn = as_function(net);
    UatRow row;
    row.beta = beta;
    row.bound = beta * std::log(static_cast<double>(net.directions));
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
      const Point u = rule.nodes.col(i);
      const double exact = gauge ? P.gauge(u) : P.support(u);
      row.max_gap = std::max(row.max_gap, std::abs(fn.value(u) - exact));
    }
    // Support functions: d_H(A, B) = sup_u |h_A(u) − h_B(u)|.
    row.hausdorff = gauge ? hausdorff_estimate(make_body(fn, kind), poly_body, n).value : row.max_gap;
    rows.push_back(row);
  }
  return rows;
}

// --------------------------------------------------------------- statistics

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

QuantileSummary run_statistics(double key, int repeats, std::uint64_t base_seed,
                               const std::function<double(std::uint64_t)>& run, int threads) {
  if (repeats < 3) throw std::invalid_argument("statistics need at least 3 repeats");
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  std::vector<std::optional<double>> results(static_cast<std::size_t>(repeats));
  auto one = [&](int r) {
    try {
      const double v = run(base_seed + static_cast<std::uint64_t>(r));
      if (std::isfinite(v)) results[static_cast<std::size_t>(r)] = v;
    } catch (const std::exception&) {
    }
  };
  if (threads == 1) {
    for (int r = 0; r < repeats; ++r) one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(threads, repeats); ++t)
      pool.emplace_back([&] {
        for (int r = next++; r < repeats; r = next++) one(r);
      });
    for (auto& th : pool) th.join();
  }
  QuantileSummary s;
  s.key = key;
  std::vector<double> vals;
  for (const auto& v : results) {
    if (v) vals.push_back(*v);
    else ++s.failures;
  }
  s.runs = static_cast<int>(vals.size());
  if (vals.empty()) throw std::runtime_error("every statistics run failed");
  s.q25 = quantile(vals, 0.25);
  s.median = quantile(vals, 0.5);
  s.q75 = quantile(vals, 0.75);
  return s;
}

std::string statistics_csv(const std::vector<QuantileSummary>& rows, const std::string& key_name) {
  std::ostringstream out;
  out << key_name << ",q25,median,q75,runs,failures\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%d,%d\n", r.key, r.q25, r.median, r.q75,
                  r.runs, r.failures);
    out << buf;
  }
  return out.str();
}

// ------------------------------------------------------------------ metrics

void MetricsReport::set(const std::string& key, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("metric '" + key + "' is not finite");
  for (auto& e : entries_)
    if (e.first == key) {
      e.second = value;
      return;
    }
  entries_.emplace_back(key, value);
}

double MetricsReport::get(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.first == key) return e.second;
  throw std::out_of_range("no metric '" + key + "'");
}

bool MetricsReport::has(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

std::string MetricsReport::to_text() const {
  std::ostringstream out;
  char buf[64];
  for (const auto& [k, v] : entries_) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << k << " = " << buf << "\n";
  }
  return out.str();
}

MetricsReport MetricsReport::parse(const std::string& text) {
  MetricsReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    r.set(line.substr(0, eq), std::stod(line.substr(eq + 3)));
  }
  return r;
}

}  // namespace convexnet
