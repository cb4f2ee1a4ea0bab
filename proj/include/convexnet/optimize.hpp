#pragma once

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace convexnet {

/// Loss returning its value and writing the gradient.
using LossFunction = std::function<double(const Eigen::VectorXd& theta, Eigen::VectorXd& grad)>;

struct LbfgsConfig {
  int history = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  double grad_tol = 1e-7;
  int max_iter = 500;
  int max_line_search = 25;

  void validate() const;
};

struct AdamConfig {
  double lr = 1e-3;
  int max_iter = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::vector<double> metrics;
  double wall_time = 0.0;
};

struct RunLog {
  std::vector<std::string> metric_names;
  std::vector<IterationRecord> records;

  /// CSV with columns iteration, loss, grad_norm, metrics… (wall time omitted so
  /// logs of identical runs compare equal byte for byte).
  void write_csv(std::ostream& out) const;
};

enum class StopReason { GradientTolerance, MaxIterations, LineSearchFailure, Aborted, NonFinite };
const char* to_string(StopReason r);

/// Per-iteration hook: fills metric values for the log; returning false aborts
/// the run (for example when the body stops being valid).
struct Callbacks {
  std::vector<std::string> metric_names;
  std::function<bool(const Eigen::VectorXd& theta, int iteration, std::vector<double>& metrics)>
      on_iteration;
};

struct OptimizeResult {
  Eigen::VectorXd theta;  // best seen
  double loss = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  StopReason reason = StopReason::MaxIterations;
  std::string message;
  RunLog log;
};

/// L-BFGS (two-loop recursion, γ = sᵀy/yᵀy) with a strong-Wolfe line search
/// (bracketing and cubic-interpolation zoom). Trial points whose loss is not
/// finite, or whose evaluation throws, are treated as overshoots and the step is
/// shortened.
OptimizeResult lbfgs_minimize(const LossFunction& loss, const Eigen::VectorXd& theta0,
                              const LbfgsConfig& cfg, const Callbacks& callbacks = {});

OptimizeResult adam_minimize(const LossFunction& loss, const Eigen::VectorXd& theta0,
                             const AdamConfig& cfg, const Callbacks& callbacks = {});

/// L-BFGS; on line-search failure runs Adam for cfg.max_iter steps and retries
/// L-BFGS once from the Adam iterate. The log concatenates all phases.
OptimizeResult minimize_with_fallback(const LossFunction& loss, const Eigen::VectorXd& theta0,
                                      const LbfgsConfig& cfg, const AdamConfig& adam,
                                      const Callbacks& callbacks = {});

}  // namespace convexnet
