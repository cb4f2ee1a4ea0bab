#include "convexnet/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "convexnet/expression.hpp"
#include "convexnet/oracles.hpp"

namespace convexnet {

namespace {

// ------------------------------------------------------------ field binding

// Applies v(name, field) to every configurable field, in output order.
template <class C, class V>
void visit_fields(C& c, V&& v) {
  v("experiment", c.experiment);
  v("dim", c.dim);
  v("seed", c.seed);
  v("threads", c.threads);
  v("net.directions", c.net.directions);
  v("net.seed", c.net.seed);
  v("net.init_scale", c.net.init_scale);
  v("net.symmetry", c.net.symmetry);
  v("net.group_file", c.net.group_file);
  v("net.kind", c.net.kind);
  v("net.positivity_eps", c.net.positivity_eps);
  v("quadrature.sphere", c.quadrature.sphere);
  v("quadrature.radial", c.quadrature.radial);
  v("optimizer.method", c.optimizer.method);
  v("optimizer.max_iter", c.optimizer.max_iter);
  v("optimizer.grad_tol", c.optimizer.grad_tol);
  v("optimizer.history", c.optimizer.history);
  v("optimizer.c1", c.optimizer.c1);
  v("optimizer.c2", c.optimizer.c2);
  v("optimizer.max_line_search", c.optimizer.max_line_search);
  v("optimizer.adam_lr", c.optimizer.adam_lr);
  v("optimizer.adam_iter", c.optimizer.adam_iter);
  v("pde.centers", c.pde.centers);
  v("pde.alpha", c.pde.alpha);
  v("pde.support_factor", c.pde.support_factor);
  v("pde.poly_degree", c.pde.poly_degree);
  v("pde.mfs_tol", c.pde.mfs_tol);
  v("pde.mfs_n0", c.pde.mfs_n0);
  v("pde.mfs_eps0", c.pde.mfs_eps0);
  v("pde.mfs_eps_factor", c.pde.mfs_eps_factor);
  v("pde.mfs_max_rounds", c.pde.mfs_max_rounds);
  v("fit.target", c.fit.target);
  v("fit.sigma", c.fit.sigma);
  v("fit.n_samples", c.fit.n_samples);
  v("fit.acc_samples", c.fit.acc_samples);
  v("stats.repeats", c.stats.repeats);
  v("stats.vary", c.stats.vary);
  v("stats.values", c.stats.values);
  v("poisson.f", c.poisson.f);
  v("torsion.objective", c.torsion.objective);
  v("torsion.x_star", c.torsion.x_star);
  v("torsion.verify_tol", c.torsion.verify_tol);
  v("torsion.verify_max_rounds", c.torsion.verify_max_rounds);
  v("minkowski.axes", c.minkowski.axes);
  v("minkowski.g", c.minkowski.g);
  v("minkowski.verify_sphere", c.minkowski.verify_sphere);
  v("mahler.verify_sphere", c.mahler.verify_sphere);
  v("uat.polytope", c.uat.polytope);
  v("uat.betas", c.uat.betas);
  v("uat.samples", c.uat.samples);
  v("pde_check.body", c.pde_check.body);
  v("pde_check.solver", c.pde_check.solver);
  v("output.dir", c.output.dir);
  v("output.resolution", c.output.resolution);
  v("output.log_every", c.output.log_every);
}

class Reader {
 public:
  Reader(const ConfigTable& t, std::vector<std::string>& problems) : t_(t), problems_(problems) {}

  void operator()(const char* name, int& f) {
    if (const auto* v = number(name)) {
      if (!integral(*v, std::numeric_limits<int>::min(), std::numeric_limits<int>::max()))
        bad(name, "must be an integer");
      else f = static_cast<int>(v->number);
    }
  }
  void operator()(const char* name, std::uint64_t& f) {
    if (const auto* v = number(name)) {
      if (!integral(*v, 0.0, 9007199254740992.0)) bad(name, "must be a non-negative integer");
      else f = static_cast<std::uint64_t>(v->number);
    }
  }
  void operator()(const char* name, double& f) {
    if (const auto* v = number(name)) f = v->number;
  }
  void operator()(const char* name, std::string& f) {
    if (const auto* v = get(name, ConfigValue::Type::String)) f = v->text;
  }
  void operator()(const char* name, std::vector<double>& f) {
    const auto* v = get(name, ConfigValue::Type::Array);
    if (!v) return;
    std::vector<double> out;
    for (const auto& item : v->items) {
      if (item.type != ConfigValue::Type::Number) {
        bad(name, "must be an array of numbers");
        return;
      }
      out.push_back(item.number);
    }
    f = std::move(out);
  }

 private:
  const ConfigValue* get(const char* name, ConfigValue::Type type) {
    const auto* v = t_.find(name);
    if (!v) return nullptr;
    if (v->type != type) {
      bad(name, std::string("expected a ") + to_string(type) + ", got a " + to_string(v->type));
      return nullptr;
    }
    return v;
  }
  const ConfigValue* number(const char* name) { return get(name, ConfigValue::Type::Number); }
  static bool integral(const ConfigValue& v, double lo, double hi) {
    return v.number == std::floor(v.number) && v.number >= lo && v.number <= hi;
  }
  void bad(const char* name, const std::string& msg) {
    const auto* v = t_.find(name);
    problems_.push_back("line " + std::to_string(v ? v->line : 0) + ": key '" + name + "' " + msg);
  }

  const ConfigTable& t_;
  std::vector<std::string>& problems_;
};

struct Writer {
  std::string section;
  std::ostringstream out;

  void key(const std::string& name, const std::string& value) {
    const auto dot = name.find('.');
    const std::string sec = dot == std::string::npos ? "" : name.substr(0, dot);
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    out << name.substr(dot == std::string::npos ? 0 : dot + 1) << " = " << value << "\n";
  }
  void operator()(const char* n, const int& f) { key(n, std::to_string(f)); }
  void operator()(const char* n, const std::uint64_t& f) { key(n, std::to_string(f)); }
  void operator()(const char* n, const double& f) { key(n, format_number(f)); }
  void operator()(const char* n, const std::string& f) { key(n, quote(f)); }
  void operator()(const char* n, const std::vector<double>& f) {
    std::string s = "[";
    for (std::size_t i = 0; i < f.size(); ++i) s += (i ? ", " : "") + format_number(f[i]);
    key(n, s + "]");
  }
};

// ------------------------------------------------------------------ defaults

bool is_one_of(const std::string& s, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (s == o) return true;
  return false;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> default_axes(int dim) {
  switch (dim) {
    case 2: return {1.3, 0.8};
    case 3: return {1.3, 1.0, 0.8};
    default: return {1.3, 1.0, 0.9, 0.8};
  }
}

// Ball or ellipsoid oracle as a gauge body, from "ball[:r]" / "ellipsoid:a,b[,c]".
QuadraticNorm analytic_gauge(const std::string& spec, int dim, Eigen::VectorXd* axes) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::vector<double> nums;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      const double x = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
      nums.push_back(x);
    }
  }
  Eigen::VectorXd a;
  if (name == "ball") {
    if (nums.size() > 1) throw std::invalid_argument("ball takes one radius");
    a = Eigen::VectorXd::Constant(dim, nums.empty() ? 1.0 : nums[0]);
  } else if (name == "ellipsoid") {
    if (static_cast<int>(nums.size()) != dim)
      throw std::invalid_argument("ellipsoid needs " + std::to_string(dim) + " semi-axes");
    a = to_vector(nums);
  } else {
    throw std::invalid_argument("unknown body '" + spec + "' (expected ball[:r] or ellipsoid:…)");
  }
  if (!(a.minCoeff() > 0.0)) throw std::invalid_argument("semi-axes must be positive");
  if (axes) *axes = a;
  return QuadraticNorm::ellipsoid_gauge(a);
}

}  // namespace

std::string poisson_source_text(const std::string& f) {
  // Negative near the origin and positive far away, so ∫u has a finite minimizer.
  if (f == "preset1") return "(x1 - 0.3)^2 + 2*x2^2 - 0.6";
  if (f == "preset2") return "x1^2 + x2^2 - 0.8 + 0.5*sin(3*x1)*cos(2*x2)";
  return f;
}

void resolve(ExperimentConfig& c) {
  std::vector<std::string> p;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) p.push_back(msg);
  };
  const auto& names = experiment_names();
  if (c.experiment.empty()) {
    p.push_back("missing required key 'experiment'");
    throw ConfigError(p);
  }
  if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    p.push_back("key 'experiment': unknown experiment '" + c.experiment + "' (expected one of " +
                list + ")");
    throw ConfigError(p);
  }
  const std::string& e = c.experiment;

  if (c.dim == 0)
    c.dim = is_one_of(e, {"fit", "fit-stats", "minkowski", "uat-check"}) ? 3 : 2;
  need(c.dim >= 2 && c.dim <= kMaxDim, "key 'dim' must be 2, 3 or 4");
  if (!(c.dim >= 2 && c.dim <= kMaxDim)) throw ConfigError(p);
  const int d = c.dim;
  need(c.threads >= 1, "key 'threads' must be at least 1");

  // net
  if (c.net.directions == 0) c.net.directions = e == "saint-venant" ? 32 : d == 2 ? 64 : 128;
  need(c.net.directions >= 1, "key 'net.directions' must be at least 1");
  if (c.net.seed == 0) c.net.seed = c.seed + 1000003;
  if (c.net.init_scale == 0.0) c.net.init_scale = e == "mahler" ? 3.0 : 1.0;
  need(c.net.init_scale > 0.0, "key 'net.init_scale' must be positive");
  if (c.net.symmetry == 0) c.net.symmetry = e == "mahler" && c.net.group_file.empty() ? 4 : 1;
  need(c.net.symmetry >= 1, "key 'net.symmetry' must be at least 1");
  need(c.net.symmetry == 1 || d == 2, "key 'net.symmetry' > 1 needs dim = 2 (use net.group_file)");
  need(c.net.symmetry == 1 || c.net.group_file.empty(),
       "keys 'net.symmetry' and 'net.group_file' are mutually exclusive");
  if (c.net.kind.empty()) c.net.kind = e == "minkowski" ? "support" : "gauge";
  need(is_one_of(c.net.kind, {"gauge", "support"}), "key 'net.kind' must be \"gauge\" or \"support\"");
  need(!is_one_of(e, {"fit", "fit-stats", "mahler"}) || c.net.kind == "gauge",
       "key 'net.kind' must be \"gauge\" for " + e);
  need(e != "minkowski" || c.net.kind == "support", "key 'net.kind' must be \"support\" for minkowski");
  need(c.net.positivity_eps >= 0.0, "key 'net.positivity_eps' must be non-negative");

  // quadrature
  if (c.quadrature.sphere == 0) {
    c.quadrature.sphere = default_sphere_n(d);
    if (e == "mahler" && d == 2) c.quadrature.sphere = 2048;
    if (e == "torsion-gradient" && d == 2) c.quadrature.sphere = 512;
  }
  need(c.quadrature.sphere >= 8, "key 'quadrature.sphere' must be at least 8");
  need(c.quadrature.radial >= 1, "key 'quadrature.radial' must be at least 1");

  // optimizer
  need(is_one_of(c.optimizer.method, {"lbfgs", "adam", "lbfgs+adam"}),
       "key 'optimizer.method' must be \"lbfgs\", \"adam\" or \"lbfgs+adam\"");
  if (c.optimizer.max_iter == 0)
    c.optimizer.max_iter = is_one_of(e, {"fit", "fit-stats"}) ? 1500
                           : e == "poisson"             ? 200
                           : e == "torsion-gradient"    ? 100
                                                        : 300;
  need(c.optimizer.max_iter >= 1, "key 'optimizer.max_iter' must be at least 1");
  need(c.optimizer.grad_tol > 0.0, "key 'optimizer.grad_tol' must be positive");
  need(c.optimizer.history >= 1, "key 'optimizer.history' must be at least 1");
  need(0.0 < c.optimizer.c1 && c.optimizer.c1 < c.optimizer.c2 && c.optimizer.c2 < 1.0,
       "keys 'optimizer.c1' and 'optimizer.c2' need 0 < c1 < c2 < 1");
  need(c.optimizer.max_line_search >= 1, "key 'optimizer.max_line_search' must be at least 1");
  need(c.optimizer.adam_lr > 0.0, "key 'optimizer.adam_lr' must be positive");
  need(c.optimizer.adam_iter >= 1, "key 'optimizer.adam_iter' must be at least 1");

  // pde
  need(c.pde.centers >= 16, "key 'pde.centers' must be at least 16");
  need(c.pde.alpha >= 0.0, "key 'pde.alpha' must be non-negative (0 selects the default)");
  need(c.pde.support_factor >= 0.0, "key 'pde.support_factor' must be non-negative");
  need(c.pde.poly_degree >= -1 && c.pde.poly_degree <= 1, "key 'pde.poly_degree' must be -1, 0 or 1");
  need(c.pde.mfs_tol > 0.0, "key 'pde.mfs_tol' must be positive");
  if (c.pde.mfs_n0 == 0) c.pde.mfs_n0 = d == 2 ? 64 : 256;
  if (c.pde.mfs_eps0 == 0.0) c.pde.mfs_eps0 = d == 2 ? 0.3 : 0.6;
  if (c.pde.mfs_max_rounds == 0) c.pde.mfs_max_rounds = e == "torsion-gradient" ? 4 : 6;
  need(c.pde.mfs_n0 >= 4, "key 'pde.mfs_n0' must be at least 4");
  need(c.pde.mfs_eps0 > 0.0, "key 'pde.mfs_eps0' must be positive");
  need(c.pde.mfs_eps_factor > 0.0 && c.pde.mfs_eps_factor <= 1.0,
       "key 'pde.mfs_eps_factor' must lie in (0, 1]");
  need(c.pde.mfs_max_rounds >= 1, "key 'pde.mfs_max_rounds' must be at least 1");

  // fit
  if (c.fit.target.empty()) c.fit.target = "octahedron";
  try {
    make_target(c.fit.target, d);
  } catch (const std::exception& ex) {
    p.push_back("key 'fit.target': " + std::string(ex.what()));
  }
  need(c.fit.sigma >= 0.0, "key 'fit.sigma' must be non-negative");
  need(c.fit.n_samples >= 1, "key 'fit.n_samples' must be at least 1");
  need(c.fit.acc_samples >= 10000, "key 'fit.acc_samples' must be at least 10000");

  // stats
  need(c.stats.repeats >= 3, "key 'stats.repeats' must be at least 3");
  need(is_one_of(c.stats.vary, {"sigma", "n_samples"}),
       "key 'stats.vary' must be \"sigma\" or \"n_samples\"");
  if (c.stats.values.empty())
    c.stats.values = c.stats.vary == "n_samples" ? std::vector<double>{10, 100, 1000, 10000}
                                                 : std::vector<double>{0.0, 0.01, 0.05};
  for (double v : c.stats.values) {
    if (c.stats.vary == "n_samples")
      need(v >= 1 && v == std::floor(v) && v <= 1e7,
           "key 'stats.values' must hold positive integer sample counts");
    else
      need(v >= 0.0, "key 'stats.values' must hold non-negative noise levels");
  }

  // poisson
  try {
    const Expression f(poisson_source_text(c.poisson.f));
    need(f.max_variable() <= d, "key 'poisson.f' uses a coordinate beyond dim");
  } catch (const ExpressionError& ex) {
    p.push_back("key 'poisson.f': " + std::string(ex.what()));
  }

  // torsion
  need(is_one_of(c.torsion.objective, {"vol", "per"}), "key 'torsion.objective' must be \"vol\" or \"per\"");
  if (c.torsion.x_star.empty()) {
    c.torsion.x_star.assign(d, 0.0);
    c.torsion.x_star[0] = 1.0;
  }
  if (static_cast<int>(c.torsion.x_star.size()) != d) {
    p.push_back("key 'torsion.x_star' needs " + std::to_string(d) + " components");
  } else {
    const double n = to_vector(c.torsion.x_star).norm();
    need(n > 0.0, "key 'torsion.x_star' must be non-zero");
    if (n > 0.0)
      for (auto& x : c.torsion.x_star) x /= n;
  }
  need(c.torsion.verify_tol > 0.0, "key 'torsion.verify_tol' must be positive");
  need(c.torsion.verify_max_rounds >= 1, "key 'torsion.verify_max_rounds' must be at least 1");

  // minkowski
  if (c.minkowski.axes.empty()) c.minkowski.axes = default_axes(d);
  need(static_cast<int>(c.minkowski.axes.size()) == d,
       "key 'minkowski.axes' needs " + std::to_string(d) + " semi-axes");
  for (double a : c.minkowski.axes) need(a > 0.0, "key 'minkowski.axes' must be positive");
  if (!c.minkowski.g.empty()) {
    try {
      const Expression g(c.minkowski.g);
      need(g.max_variable() <= d, "key 'minkowski.g' uses a coordinate beyond dim");
    } catch (const ExpressionError& ex) {
      p.push_back("key 'minkowski.g': " + std::string(ex.what()));
    }
  }
  need(c.minkowski.verify_sphere >= 8, "key 'minkowski.verify_sphere' must be at least 8");
  need(c.mahler.verify_sphere >= 8, "key 'mahler.verify_sphere' must be at least 8");

  // uat
  if (e == "uat-check") {
    need(d <= 3, "uat-check needs dim 2 or 3");
    try {
      make_polytope(c.uat.polytope, d);
    } catch (const std::exception& ex) {
      p.push_back("key 'uat.polytope': " + std::string(ex.what()));
    }
  }
  need(!c.uat.betas.empty(), "key 'uat.betas' must not be empty");
  for (double b : c.uat.betas) need(b > 0.0, "key 'uat.betas' must be positive");
  need(c.uat.samples >= 1, "key 'uat.samples' must be at least 1");

  // pde-check
  try {
    analytic_gauge(c.pde_check.body, d, nullptr);
  } catch (const std::exception& ex) {
    p.push_back("key 'pde_check.body': " + std::string(ex.what()));
  }
  need(is_one_of(c.pde_check.solver, {"mfs", "galerkin", "both"}),
       "key 'pde_check.solver' must be \"mfs\", \"galerkin\" or \"both\"");

  // output
  if (c.output.resolution == 0) c.output.resolution = d == 2 ? 256 : 64;
  need(c.output.resolution >= 8, "key 'output.resolution' must be at least 8");
  need(c.output.log_every >= 1, "key 'output.log_every' must be at least 1");
  need(!c.output.dir.empty(), "key 'output.dir' must not be empty");

  if (!p.empty()) throw ConfigError(std::move(p));
}

ExperimentConfig parse_experiment_config(const ConfigTable& table) {
  ExperimentConfig cfg;
  std::vector<std::string> problems;
  std::vector<std::string> known;
  visit_fields(cfg, [&](const char* name, auto&) { known.emplace_back(name); });
  for (const auto& [key, value] : table.entries())
    if (std::find(known.begin(), known.end(), key) == known.end())
      problems.push_back("line " + std::to_string(value.line) + ": unknown key '" + key + "'");
  Reader reader(table, problems);
  visit_fields(cfg, reader);
  try {
    resolve(cfg);
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(ConfigTable::load(path));
}

std::string resolved_config_text(const ExperimentConfig& cfg) {
  Writer w;
  visit_fields(cfg, w);
  return w.out.str();
}

SymmetryGroup read_group(std::istream& in, int dim) {
  std::vector<Eigen::MatrixXd> mats;
  std::vector<double> cur;
  std::string line;
  auto flush = [&] {
    if (cur.empty()) return;
    if (static_cast<int>(cur.size()) != dim * dim)
      throw std::invalid_argument("group matrix with " + std::to_string(cur.size()) +
                                  " entries, expected " + std::to_string(dim * dim));
    Eigen::MatrixXd M(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) M(i, j) = cur[static_cast<std::size_t>(i * dim + j)];
    mats.push_back(M);
    cur.clear();
  };
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    double x;
    bool any = false;
    while (ls >> x) {
      cur.push_back(x);
      any = true;
    }
    if (!ls.eof()) throw std::invalid_argument("group file: cannot read '" + line + "'");
    if (!any) flush();
  }
  flush();
  if (mats.empty()) throw std::invalid_argument("group file holds no matrices");
  return SymmetryGroup(std::move(mats));
}

std::string export_shape(const SymmetrizedNet& net, BodyKind kind, const std::string& format,
                         int resolution) {
  const auto body = make_body(as_function(net), kind);
  const int d = net.base.dim;
  if (d == 2 && (format == "csv" || format == "svg")) {
    const auto pts = boundary_polyline(body, resolution);
    return format == "csv" ? polyline_csv(pts) : polyline_svg(pts);
  }
  if (d == 3 && format == "obj") return mesh_obj(boundary_mesh(body, std::max(2, resolution / 2), resolution));
  throw UnsupportedError("no '" + format + "' export in dimension " + std::to_string(d) +
                         " (2D: csv, svg; 3D: obj)");
}

// ------------------------------------------------------------------ running

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

BodyKind parse_kind(const std::string& k) { return k == "support" ? BodyKind::Support : BodyKind::Gauge; }

const char* stop_code(StopReason r) { return to_string(r); }

struct Context {
  const ExperimentConfig& cfg;
  std::ostream* progress;
  int d;
  SphereRule sphere;
  BallRule ball;
  SymmetryGroup group;
  BodyKind kind;

  explicit Context(const ExperimentConfig& c, std::ostream* p)
      : cfg(c),
        progress(p),
        d(c.dim),
        sphere(sphere_rule(c.dim, c.quadrature.sphere)),
        ball(ball_rule(c.dim, c.quadrature.radial, sphere)),
        kind(parse_kind(c.net.kind)) {
    if (!c.net.group_file.empty()) {
      std::ifstream f(c.net.group_file);
      if (!f) throw std::invalid_argument("cannot read group file '" + c.net.group_file + "'");
      group = read_group(f, c.dim);
      if (group.dim() != c.dim) throw std::invalid_argument("group dimension does not match dim");
    } else if (c.net.symmetry > 1) {
      group = SymmetryGroup::cyclic_rotations(c.net.symmetry);
    } else {
      group = SymmetryGroup::trivial(c.dim);
    }
  }

  NetShape shape() const { return {d, cfg.net.directions, &group}; }

  SymmetrizedNet initial_net(std::uint64_t seed) const {
    SublinearNet base = random_net(d, cfg.net.directions, seed, sphere);
    base.W *= cfg.net.init_scale;
    auto net = normalize_scale(SymmetrizedNet{base, group}, sphere);
    if (!validate_positive(net, sphere, cfg.net.positivity_eps))
      throw InitializationError("initial net is not positive on the sphere");
    return net;
  }

  SymmetrizedNet net_from(const Eigen::VectorXd& theta) const {
    return {SublinearNet::unflatten(d, cfg.net.directions, as_span(theta)), group};
  }

  void say(const std::string& s) const {
    if (progress) *progress << s << std::endl;
  }
};

Eigen::VectorXd flat(const SymmetrizedNet& net) {
  const auto v = net.base.flatten();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Optimizer run with the positivity guard and per-iteration metrics.
OptimizeResult optimize(const Context& ctx, const LossFunction& loss, const Eigen::VectorXd& theta0,
                        std::vector<std::string> metric_names,
                        std::function<std::vector<double>(const Eigen::VectorXd&)> metrics,
                        std::string* abort_message) {
  const auto& o = ctx.cfg.optimizer;
  const NetShape shape = ctx.shape();
  Callbacks cb;
  cb.metric_names = std::move(metric_names);
  const std::size_t nm = cb.metric_names.size();
  cb.on_iteration = [&, nm](const Eigen::VectorXd& theta, int it, std::vector<double>& out) {
    const double eps = ctx.cfg.net.positivity_eps;
    if (!(min_on_nodes_lower_bound(ctx.net_from(theta), ctx.sphere) > eps)) {
      const double pmin = min_on_nodes(net_function<double>(shape, as_span(theta)), ctx.sphere);
      if (!(pmin > eps)) {
        if (abort_message)
          *abort_message = "net lost positivity at iteration " + std::to_string(it) +
                           " (min p on the sphere rule = " + format_number(pmin) + ")";
        return false;
      }
    }
    if (it % ctx.cfg.output.log_every == 0 && metrics) out = metrics(theta);
    else out.assign(nm, kNaN);
    if (ctx.progress && it % 10 == 0) {
      std::ostringstream s;
      s << "iteration " << it;
      for (std::size_t k = 0; k < nm && k < out.size(); ++k)
        s << "  " << cb.metric_names[k] << " " << format_number(out[k]);
      ctx.say(s.str());
    }
    return true;
  };
  LbfgsConfig lb;
  lb.history = o.history;
  lb.c1 = o.c1;
  lb.c2 = o.c2;
  lb.grad_tol = o.grad_tol;
  lb.max_iter = o.max_iter;
  lb.max_line_search = o.max_line_search;
  AdamConfig ad;
  ad.lr = o.adam_lr;
  ad.max_iter = o.method == "adam" ? o.max_iter : o.adam_iter;
  if (o.method == "adam") return adam_minimize(loss, theta0, ad, cb);
  if (o.method == "lbfgs+adam") return minimize_with_fallback(loss, theta0, lb, ad, cb);
  return lbfgs_minimize(loss, theta0, lb, cb);
}

void finish(const Context& ctx, ExperimentOutcome& out, const OptimizeResult& res,
            const std::string& abort_message) {
  out.log = res.log;
  out.net = ctx.net_from(res.theta);
  out.kind = ctx.kind;
  out.stop_reason = stop_code(res.reason);
  out.metrics.set("iterations", res.iterations);
  out.metrics.set("grad_norm", res.grad_norm);
  if (res.reason == StopReason::Aborted || res.reason == StopReason::NonFinite) {
    out.ok = false;
    out.error = abort_message.empty() ? res.message : abort_message;
  }
  ctx.say(std::string("stopped: ") + out.stop_reason + (res.message.empty() ? "" : " (" + res.message + ")"));
}

template <class F>
void body_metrics(const Context& ctx, const ConvexBody<F>& body, MetricsReport& m) {
  m.set("volume", value_of(volume(body, ctx.ball)));
  m.set("perimeter", value_of(surface_area(body, ctx.sphere)));
  m.set("deficit", isoperimetric_deficit(body, ctx.ball, ctx.sphere));
}

// fit ---------------------------------------------------------------------

struct FitRun {
  OptimizeResult result;
  double accuracy = 0.0;
  int skipped = 0;
  std::string abort_message;
};

FitRun fit_once(const Context& ctx, const FitDataset& data, const Target& target,
                std::uint64_t net_seed, bool log_metrics) {
  const NetShape shape = ctx.shape();
  FitRun run;
  LossFunction loss = [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
    auto vg = fit_loss(shape, as_span(t), data);
    g = vg.grad;
    return vg.value;
  };
  std::function<std::vector<double>(const Eigen::VectorXd&)> metrics;
  if (log_metrics)
    metrics = [&](const Eigen::VectorXd& t) {
      return std::vector<double>{
          accuracy_l2(net_function<double>(shape, as_span(t)), target, ctx.cfg.fit.acc_samples)};
    };
  const Eigen::VectorXd theta0 = flat(ctx.initial_net(net_seed));
  run.result = optimize(ctx, loss, theta0, log_metrics ? std::vector<std::string>{"accuracy"}
                                                       : std::vector<std::string>{},
                        metrics, &run.abort_message);
  fit_loss(shape, as_span(run.result.theta), data, &run.skipped);
  run.accuracy = accuracy_l2(net_function<double>(shape, as_span(run.result.theta)), target,
                             ctx.cfg.fit.acc_samples);
  return run;
}

ExperimentOutcome run_fit(const Context& ctx) {
  const auto& c = ctx.cfg;
  const Target target = make_target(c.fit.target, ctx.d);
  const FitDataset data = generate_noisy_samples(target, c.fit.n_samples, c.fit.sigma, c.seed);
  ExperimentOutcome out;
  auto run = fit_once(ctx, data, target, c.net.seed, true);
  finish(ctx, out, run.result, run.abort_message);
  out.metrics.set("loss", run.result.loss);
  out.metrics.set("accuracy", run.accuracy);
  out.metrics.set("skipped_samples", run.skipped);
  body_metrics(ctx, make_body(as_function(*out.net), BodyKind::Gauge), out.metrics);
  if (run.skipped > 0) ctx.say("warning: " + std::to_string(run.skipped) + " samples at the origin skipped");
  return out;
}

ExperimentOutcome run_fit_stats(const Context& ctx) {
  const auto& c = ctx.cfg;
  const Target target = make_target(c.fit.target, ctx.d);
  const bool vary_sigma = c.stats.vary == "sigma";
  ExperimentOutcome out;
  std::vector<QuantileSummary> rows;
  for (std::size_t i = 0; i < c.stats.values.size(); ++i) {
    const double key = c.stats.values[i];
    const double sigma = vary_sigma ? key : c.fit.sigma;
    const int n = vary_sigma ? c.fit.n_samples : static_cast<int>(key);
    auto run = [&](std::uint64_t seed) {
      const FitDataset data = generate_noisy_samples(target, n, sigma, seed);
      // Fresh init and fresh samples per seed; the net seed is offset from the data seed.
      const auto r = fit_once(ctx, data, target, seed + 1000003, false);
      if (r.result.reason == StopReason::Aborted || r.result.reason == StopReason::NonFinite)
        throw std::runtime_error(r.abort_message);
      return r.accuracy;
    };
    const auto s = run_statistics(key, c.stats.repeats, c.seed, run, c.threads);
    rows.push_back(s);
    const std::string idx = "[" + std::to_string(i) + "]";
    out.metrics.set(c.stats.vary + idx, key);
    out.metrics.set("acc_q25" + idx, s.q25);
    out.metrics.set("acc_median" + idx, s.median);
    out.metrics.set("acc_q75" + idx, s.q75);
    out.metrics.set("failures" + idx, s.failures);
    ctx.say(c.stats.vary + " " + format_number(key) + ": median accuracy " + format_number(s.median) +
            " [" + format_number(s.q25) + ", " + format_number(s.q75) + "], failures " +
            std::to_string(s.failures));
  }
  out.files.emplace_back("statistics.csv", statistics_csv(rows, c.stats.vary));
  out.stop_reason = "completed";
  return out;
}

// poisson -----------------------------------------------------------------

GalerkinSetup galerkin_setup(const Context& ctx) {
  const auto& p = ctx.cfg.pde;
  GalerkinSetup s;
  s.basis = make_rbf_basis(ctx.d, p.centers, p.poly_degree, p.support_factor);
  s.sphere = ctx.sphere;
  s.ball = ctx.ball;
  s.alpha = p.alpha > 0.0 ? p.alpha : default_penalty(s.basis);
  return s;
}

template <class F>
std::string galerkin_solution_csv(const ConvexBody<F>& body, const GalerkinSolution& sol, int res) {
  return solution_csv(
      body,
      [&](const Point& y) {
        if (y.norm() == 0.0) return sol.reference_value(Point::Zero(y.size()));
        return sol.reference_value(inverse_gauge(body, y));
      },
      res);
}

ExperimentOutcome run_poisson(const Context& ctx) {
  const auto& c = ctx.cfg;
  const NetShape shape = ctx.shape();
  const Expression f(poisson_source_text(c.poisson.f));
  const GalerkinSetup setup = galerkin_setup(ctx);
  LossFunction loss = [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
    auto vg = poisson_objective(shape, ctx.kind, as_span(t), f, setup);
    g = vg.grad;
    return vg.value;
  };
  auto metrics = [&](const Eigen::VectorXd& t) {
    const auto body = make_body(net_function<double>(shape, as_span(t)), ctx.kind);
    return std::vector<double>{value_of(volume(body, ctx.ball))};
  };
  ExperimentOutcome out;
  std::string abort_message;
  const auto res = optimize(ctx, loss, flat(ctx.initial_net(c.net.seed)), {"volume"}, metrics, &abort_message);
  finish(ctx, out, res, abort_message);
  const auto final_result =
      galerkin_integral(shape, ctx.kind, as_span(res.theta), f, setup.alpha, setup.basis, setup.ball, setup.sphere);
  out.metrics.set("J", final_result.integral.value);
  out.metrics.set("rcond", final_result.solution.rcond);
  out.metrics.set("alpha", setup.alpha);
  const auto body = make_body(as_function(*out.net), ctx.kind);
  body_metrics(ctx, body, out.metrics);
  if (ctx.kind == BodyKind::Gauge)
    out.files.emplace_back("solution.csv", galerkin_solution_csv(body, final_result.solution, 64));
  return out;
}

// torsion-gradient ----------------------------------------------------------

MfsOptions mfs_options(const ExperimentConfig& c) {
  MfsOptions o;
  o.n0 = c.pde.mfs_n0;
  o.eps0 = c.pde.mfs_eps0;
  o.tol = c.pde.mfs_tol;
  o.max_rounds = c.pde.mfs_max_rounds;
  o.eps_factor = c.pde.mfs_eps_factor;
  return o;
}

ExperimentOutcome run_torsion_gradient(const Context& ctx) {
  const auto& c = ctx.cfg;
  const NetShape shape = ctx.shape();
  const Point xs = to_vector(c.torsion.x_star);
  const MfsOptions mfs = mfs_options(c);
  const bool per = c.torsion.objective == "per";
  LossFunction loss = [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
    const auto r = torsion_gradient_objectives(shape, ctx.kind, as_span(t), xs, mfs, ctx.ball, ctx.sphere);
    const auto& o = per ? r.j_per : r.j_vol;
    g = -o.grad;
    return -o.value;
  };
  ExperimentOutcome out;
  std::string abort_message;
  const auto res = optimize(ctx, loss, flat(ctx.initial_net(c.net.seed)), {}, {}, &abort_message);
  finish(ctx, out, res, abort_message);
  const auto r = torsion_gradient_objectives(shape, ctx.kind, as_span(res.theta), xs, mfs, ctx.ball, ctx.sphere);
  out.metrics.set("j_vol", r.j_vol.value);
  out.metrics.set("j_per", r.j_per.value);
  out.metrics.set("normal_derivative", r.normal_derivative.value);
  out.metrics.set("mfs_n", r.model.n);
  out.metrics.set("mfs_residual", r.model.residual);

  // Re-solve at a tighter tolerance; values only.
  const auto body = make_body(as_function(*out.net), ctx.kind);
  MfsOptions tight = mfs;
  tight.tol = c.torsion.verify_tol;
  tight.max_rounds = c.torsion.verify_max_rounds;
  MfsModel model;
  try {
    model = solve_torsion_mfs(body, tight);
  } catch (const MfsConvergenceError& e) {
    model = e.best();
    ctx.say("warning: verification solve stopped at residual " + format_number(model.residual));
  }
  const double dn = std::abs(torsion_normal_derivative(model, body, xs));
  const double vol = value_of(volume(body, ctx.ball));
  const double perim = value_of(surface_area(body, ctx.sphere));
  out.metrics.set("j_vol_verified", dn / std::pow(vol, 1.0 / ctx.d));
  out.metrics.set("j_per_verified", dn / std::pow(perim, 1.0 / (ctx.d - 1.0)));
  out.metrics.set("verify_mfs_n", model.n);
  out.metrics.set("verify_mfs_residual", model.residual);
  out.metrics.set("volume", vol);
  out.metrics.set("perimeter", perim);
  if (ctx.kind == BodyKind::Gauge)
    out.files.emplace_back("solution.csv",
                           solution_csv(body, [&](const Point& y) { return torsion_eval(model, body, y); },
                                        ctx.d == 2 ? 64 : 24));
  return out;
}

// minkowski ---------------------------------------------------------------

Eigen::VectorXd curvature_targets(const ExperimentConfig& c, const SphereRule& rule) {
  Eigen::VectorXd g(rule.size());
  const Eigen::VectorXd axes = to_vector(c.minkowski.axes);
  std::optional<Expression> expr;
  if (!c.minkowski.g.empty()) expr.emplace(c.minkowski.g);
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    const Point u = rule.nodes.col(i);
    g[i] = expr ? (*expr)(u) : ellipsoid_curvature(axes, u);
  }
  return g;
}

ExperimentOutcome run_minkowski(const Context& ctx) {
  const auto& c = ctx.cfg;
  const NetShape shape = ctx.shape();
  const Eigen::VectorXd g = curvature_targets(c, ctx.sphere);
  LossFunction loss = [&](const Eigen::VectorXd& t, Eigen::VectorXd& grad) {
    auto vg = minkowski_loss(shape, as_span(t), g, ctx.sphere);
    grad = vg.grad;
    return vg.value;
  };
  auto metrics = [&](const Eigen::VectorXd& t) {
    return std::vector<double>{
        minkowski_relative_error(minkowski_loss(shape, as_span(t), g, ctx.sphere).value, ctx.sphere)};
  };
  ExperimentOutcome out;
  std::string abort_message;
  const auto res = optimize(ctx, loss, flat(ctx.initial_net(c.net.seed)), {"relative_error"}, metrics,
                            &abort_message);
  finish(ctx, out, res, abort_message);
  out.metrics.set("loss", res.loss);
  out.metrics.set("relative_error", minkowski_relative_error(res.loss, ctx.sphere));
  const auto fine = sphere_rule(ctx.d, c.minkowski.verify_sphere);
  const double fine_loss = minkowski_loss(shape, as_span(res.theta), curvature_targets(c, fine), fine).value;
  out.metrics.set("relative_error_verified", minkowski_relative_error(fine_loss, fine));
  const auto body = make_body(as_function(*out.net), BodyKind::Support);
  out.metrics.set("volume", value_of(volume(body, ctx.ball)));
  if (c.minkowski.g.empty()) {
    double target_volume = ball_volume(ctx.d);
    for (double a : c.minkowski.axes) target_volume *= a;
    out.metrics.set("volume_target", target_volume);
  }
  return out;
}

// mahler ------------------------------------------------------------------

ExperimentOutcome run_mahler(const Context& ctx) {
  const auto& c = ctx.cfg;
  const NetShape shape = ctx.shape();
  LossFunction loss = [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
    auto vg = mahler_volume(shape, as_span(t), ctx.ball);
    g = vg.grad;
    return vg.value;
  };
  ExperimentOutcome out;
  std::string abort_message;
  const auto res = optimize(ctx, loss, flat(ctx.initial_net(c.net.seed)), {}, {}, &abort_message);
  finish(ctx, out, res, abort_message);
  // The product is scale-invariant, so the optimizer leaves the scale free to drift.
  out.net = normalize_scale(*out.net, ctx.sphere);
  out.metrics.set("mahler", res.loss);
  const auto body = make_body(as_function(*out.net), BodyKind::Gauge);
  const auto fine_sphere = sphere_rule(ctx.d, c.mahler.verify_sphere);
  const auto fine = ball_rule(ctx.d, 2, fine_sphere);
  const double vol = value_of(volume(body, fine));
  const double polar = value_of(volume(polar_body(body), fine));
  out.metrics.set("mahler_verified", vol * polar);
  out.metrics.set("volume", vol);
  out.metrics.set("polar_volume", polar);
  const int n = ctx.group.order() > 1 && c.net.group_file.empty() ? c.net.symmetry : 0;
  if (n >= 3) {
    const double target = n * n * std::pow(std::sin(std::numbers::pi / n), 2);
    out.metrics.set("mahler_target", target);
    out.metrics.set("relative_error_verified", vol * polar / target - 1.0);
  }
  return out;
}

// saint-venant --------------------------------------------------------------

ExperimentOutcome run_saint_venant(const Context& ctx) {
  const auto& c = ctx.cfg;
  const NetShape shape = ctx.shape();
  const GalerkinSetup setup = galerkin_setup(ctx);
  LossFunction loss = [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
    auto vg = saint_venant_ratio(shape, ctx.kind, as_span(t), setup);
    g = -vg.grad;
    return -vg.value;
  };
  auto deficit = [&](const Eigen::VectorXd& t) {
    const auto body = make_body(net_function<double>(shape, as_span(t)), ctx.kind);
    return isoperimetric_deficit(body, ctx.ball, ctx.sphere);
  };
  ExperimentOutcome out;
  const Eigen::VectorXd theta0 = flat(ctx.initial_net(c.net.seed));
  out.metrics.set("deficit_initial", deficit(theta0));
  std::string abort_message;
  const auto res = optimize(
      ctx, loss, theta0, {"deficit"}, [&](const Eigen::VectorXd& t) { return std::vector<double>{deficit(t)}; },
      &abort_message);
  finish(ctx, out, res, abort_message);
  out.metrics.set("ratio", -res.loss);
  out.metrics.set("ratio_ball", std::pow(ball_volume(ctx.d), -2.0 / ctx.d) / (ctx.d * (ctx.d + 2.0)));
  const auto T = poisson_objective(shape, ctx.kind, as_span(res.theta), UnitSource{}, setup);
  out.metrics.set("torsional_rigidity", T.value);
  body_metrics(ctx, make_body(as_function(*out.net), ctx.kind), out.metrics);
  return out;
}

// uat-check -----------------------------------------------------------------

ExperimentOutcome run_uat(const Context& ctx) {
  const auto& c = ctx.cfg;
  const Polytope P = make_polytope(c.uat.polytope, ctx.d);
  const auto rows = uat_harness(P, ctx.kind, c.uat.betas, c.uat.samples);
  ExperimentOutcome out;
  std::ostringstream csv;
  csv << "beta,max_gap,bound,hausdorff\n";
  bool bound_ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string idx = "[" + std::to_string(i) + "]";
    out.metrics.set("beta" + idx, r.beta);
    out.metrics.set("max_gap" + idx, r.max_gap);
    out.metrics.set("bound" + idx, r.bound);
    out.metrics.set("hausdorff" + idx, r.hausdorff);
    csv << format_number(r.beta) << "," << format_number(r.max_gap) << "," << format_number(r.bound)
        << "," << format_number(r.hausdorff) << "\n";
    bound_ok = bound_ok && r.max_gap <= r.bound;
  }
  // Sorted by decreasing β, the estimates must strictly decrease.
  auto sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const UatRow& a, const UatRow& b) { return a.beta > b.beta; });
  bool monotone = true;
  for (std::size_t i = 1; i < sorted.size(); ++i) monotone = monotone && sorted[i].hausdorff < sorted[i - 1].hausdorff;
  out.metrics.set("bound_holds", bound_ok ? 1.0 : 0.0);
  out.metrics.set("hausdorff_decreasing", monotone ? 1.0 : 0.0);
  out.files.emplace_back("uat.csv", csv.str());
  out.stop_reason = "completed";
  // The sharpest net, for the shape export.
  const double beta = sorted.back().beta;
  const SublinearNet net = ctx.kind == BodyKind::Gauge ? from_polytope_gauge(P.facets, beta)
                                                       : from_polytope_support(P.vertices, beta);
  out.net = SymmetrizedNet{net, SymmetryGroup::trivial(ctx.d)};
  out.kind = ctx.kind;
  return out;
}

// pde-check -----------------------------------------------------------------

ExperimentOutcome run_pde_check(const Context& ctx) {
  const auto& c = ctx.cfg;
  const int d = ctx.d;
  Eigen::VectorXd axes;
  const auto body = make_body(analytic_gauge(c.pde_check.body, d, &axes), BodyKind::Gauge);
  // −Δu = 1 on the ellipsoid: u = (1 − Σ yᵢ²/aᵢ²)/(2Σ aᵢ⁻²), so T = Vol/((d+2)Σ aᵢ⁻²)
  // and |∇u| = (1/a₁)/Σ aᵢ⁻² at a₁e₁.
  const double s = axes.array().square().inverse().sum();
  const double vol = ball_volume(d) * axes.prod();
  const double T_exact = vol / ((d + 2.0) * s);
  const double dn_exact = 1.0 / (axes[0] * s);
  const Point e1 = Point::Unit(d, 0);
  ExperimentOutcome out;
  out.metrics.set("T_exact", T_exact);
  out.metrics.set("normal_derivative_exact", dn_exact);
  if (c.pde_check.solver != "galerkin") {
    const auto model = solve_torsion_mfs(body, mfs_options(c));
    const double T = torsional_rigidity(body, model, ctx.ball);
    const double dn = std::abs(torsion_normal_derivative(model, body, e1));
    out.metrics.set("mfs_residual", model.residual);
    out.metrics.set("mfs_n", model.n);
    out.metrics.set("T_mfs", T);
    out.metrics.set("T_mfs_error", std::abs(T - T_exact));
    out.metrics.set("normal_derivative_mfs", dn);
    out.metrics.set("normal_derivative_mfs_error", std::abs(dn - dn_exact));
    ctx.say("MFS: T = " + format_number(T) + " (exact " + format_number(T_exact) + "), |dn u| = " +
            format_number(dn) + ", residual " + format_number(model.residual));
    out.files.emplace_back("solution.csv",
                           solution_csv(body, [&](const Point& y) { return torsion_eval(model, body, y); },
                                        d == 2 ? 64 : 24));
  }
  if (c.pde_check.solver != "mfs") {
    const auto setup = galerkin_setup(ctx);
    const auto sys = assemble_galerkin(body, UnitSource{}, setup.alpha, setup.basis, ctx.ball, ctx.sphere);
    const auto sol = solve_galerkin(sys, setup.basis);
    const double T = torsional_rigidity(body, sol, ctx.ball);
    out.metrics.set("T_galerkin", T);
    out.metrics.set("T_galerkin_rel_error", std::abs(T / T_exact - 1.0));
    out.metrics.set("galerkin_rcond", sol.rcond);
    ctx.say("Galerkin: T = " + format_number(T) + " (exact " + format_number(T_exact) + "), rcond " +
            format_number(sol.rcond));
    if (c.pde_check.solver == "galerkin")
      out.files.emplace_back("solution.csv", galerkin_solution_csv(body, sol, d == 2 ? 64 : 24));
  }
  out.stop_reason = "completed";
  return out;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
  const auto t0 = Clock::now();
  const Context ctx(cfg, progress);
  const std::string& e = cfg.experiment;
  ExperimentOutcome out;
  if (e == "fit") out = run_fit(ctx);
  else if (e == "fit-stats") out = run_fit_stats(ctx);
  else if (e == "poisson") out = run_poisson(ctx);
  else if (e == "torsion-gradient") out = run_torsion_gradient(ctx);
  else if (e == "minkowski") out = run_minkowski(ctx);
  else if (e == "mahler") out = run_mahler(ctx);
  else if (e == "saint-venant") out = run_saint_venant(ctx);
  else if (e == "uat-check") out = run_uat(ctx);
  else if (e == "pde-check") out = run_pde_check(ctx);
  else throw std::invalid_argument("unknown experiment '" + e + "'");
  out.metrics.set("runtime", std::chrono::duration<double>(Clock::now() - t0).count());
  return out;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentOutcome& outcome,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << text;
  };
  put("config.resolved", resolved_config_text(cfg));
  std::ostringstream log;
  outcome.log.write_csv(log);
  put("runlog.csv", log.str());
  put("metrics.txt", outcome.metrics.to_text());
  if (outcome.net) {
    std::ostringstream net;
    write_net(net, outcome.net->base, &outcome.net->group);
    put("net.txt", net.str());
    const int d = outcome.net->base.dim;
    const int res = cfg.output.resolution;
    if (d == 2) {
      put("shape.csv", export_shape(*outcome.net, outcome.kind, "csv", res));
      put("shape.svg", export_shape(*outcome.net, outcome.kind, "svg", res));
    } else if (d == 3) {
      put("shape.obj", export_shape(*outcome.net, outcome.kind, "obj", res));
    }
  }
  for (const auto& [name, text] : outcome.files) put(name, text);
}

}  // namespace convexnet
