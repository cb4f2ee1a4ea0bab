#pragma once

// Experiment configuration and runners. A run produces metrics, an optimizer
// log, the final net and text exports; write_outputs lays them out as
//   config.resolved runlog.csv metrics.txt net.txt shape.{csv,svg,obj}
// plus solution.csv, statistics.csv or uat.csv where they apply.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "convexnet/config.hpp"
#include "convexnet/net.hpp"
#include "convexnet/optimize.hpp"
#include "convexnet/problems.hpp"

namespace convexnet {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"fit",          "fit-stats", "poisson",
                                                 "torsion-gradient", "minkowski", "mahler",
                                                 "saint-venant", "uat-check", "pde-check"};
  return names;
}

// Zero, empty strings and empty arrays mean "experiment default"; resolve()
// replaces them so the resolved config is explicit.
struct ExperimentConfig {
  std::string experiment;
  int dim = 0;
  std::uint64_t seed = 1;
  int threads = 1;

  struct Net {
    int directions = 0;
    std::uint64_t seed = 0;  // 0: derived from the top-level seed
    double init_scale = 0.0;
    int symmetry = 0;        // n-fold rotations in 2D; 1 disables
    std::string group_file;  // alternative to symmetry: matrices, blank-line separated
    std::string kind;        // gauge or support
    double positivity_eps = 1e-8;
  } net;

  struct Quadrature {
    int sphere = 0;
    int radial = kDefaultRadialN;
  } quadrature;

  struct Optimizer {
    std::string method = "lbfgs";  // lbfgs, adam, lbfgs+adam
    int max_iter = 0;
    double grad_tol = 1e-7;
    int history = 10;
    double c1 = 1e-4;
    double c2 = 0.9;
    int max_line_search = 25;
    double adam_lr = 1e-3;
    int adam_iter = 200;
  } optimizer;

  struct Pde {
    int centers = 300;
    double alpha = 0.0;
    double support_factor = 0.0;
    int poly_degree = 1;
    double mfs_tol = 1e-5;
    int mfs_n0 = 0;
    double mfs_eps0 = 0.0;
    double mfs_eps_factor = 0.7;
    int mfs_max_rounds = 0;
  } pde;

  struct Fit {
    std::string target;
    double sigma = 0.0;
    int n_samples = 1000;
    int acc_samples = 10000;
  } fit;

  struct Stats {
    int repeats = 20;
    std::string vary = "sigma";  // sigma or n_samples
    std::vector<double> values;
  } stats;

  struct Poisson {
    std::string f = "preset1";
  } poisson;

  struct Torsion {
    std::string objective = "vol";  // vol or per
    std::vector<double> x_star;
    double verify_tol = 1e-7;
    int verify_max_rounds = 5;
  } torsion;

  struct Minkowski {
    std::vector<double> axes;
    std::string g;  // expression in u; empty: ellipsoid curvature of `axes`
    int verify_sphere = 8192;
  } minkowski;

  struct Mahler {
    int verify_sphere = 8192;
  } mahler;

  struct Uat {
    std::string polytope = "cube";
    std::vector<double> betas = {0.1, 0.01, 0.001};
    int samples = 10000;
  } uat;

  struct PdeCheck {
    std::string body = "ball";
    std::string solver = "both";  // mfs, galerkin, both
  } pde_check;

  struct Output {
    std::string dir = "out";
    int resolution = 0;
    int log_every = 1;
  } output;
};

/// Reads and validates; every unknown key, type mismatch and out-of-range
/// value is reported in one ConfigError. The result is resolved.
ExperimentConfig parse_experiment_config(const ConfigTable& table);
ExperimentConfig load_experiment_config(const std::string& path);

/// Fills experiment defaults and checks ranges and combinations.
void resolve(ExperimentConfig& cfg);

/// Every key with its value, in a form parse_experiment_config accepts.
std::string resolved_config_text(const ExperimentConfig& cfg);

/// The source term behind poisson.f: "preset1", "preset2" or an expression.
std::string poisson_source_text(const std::string& f);

struct ExperimentOutcome {
  MetricsReport metrics;
  RunLog log;
  std::optional<SymmetrizedNet> net;
  BodyKind kind = BodyKind::Gauge;
  std::string stop_reason;
  /// Extra files, name → contents (solution.csv, statistics.csv, uat.csv).
  std::vector<std::pair<std::string, std::string>> files;
  bool ok = true;
  std::string error;
};

/// Runs the configured experiment. Module errors propagate as exceptions;
/// an optimization aborted for an invalid body returns ok = false with the
/// partial log.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

/// Writes the output layout into `dir` (created if needed).
void write_outputs(const ExperimentConfig& cfg, const ExperimentOutcome& outcome,
                   const std::filesystem::path& dir);

/// Shape export of a net body: "csv" and "svg" in 2D, "obj" in 3D.
/// resolution = polyline points (2D) or longitudes (3D, with resolution/2 rings).
std::string export_shape(const SymmetrizedNet& net, BodyKind kind, const std::string& format,
                         int resolution);

/// Group matrices as whitespace-separated rows, one blank line between matrices.
SymmetryGroup read_group(std::istream& in, int dim);

}  // namespace convexnet
