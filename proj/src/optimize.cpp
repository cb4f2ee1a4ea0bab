#include "convexnet/optimize.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace convexnet {

void LbfgsConfig::validate() const {
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw std::invalid_argument("need 0 < c1 < c2 < 1");
  if (history < 1) throw std::invalid_argument("history must be positive");
  if (max_iter < 0 || max_line_search < 1) throw std::invalid_argument("invalid iteration limits");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::GradientTolerance: return "gradient_tolerance";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::LineSearchFailure: return "line_search_failure";
    case StopReason::Aborted: return "aborted";
    case StopReason::NonFinite: return "non_finite";
  }
  return "unknown";
}

void RunLog::write_csv(std::ostream& out) const {
  out << "iteration,loss,grad_norm";
  for (const auto& n : metric_names) out << "," << n;
  out << "\n";
  char buf[64];
  for (const auto& r : records) {
    out << r.iteration;
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", r.loss, r.grad_norm);
    out << buf;
    for (double m : r.metrics) {
      std::snprintf(buf, sizeof buf, ",%.17g", m);
      out << buf;
    }
    out << "\n";
  }
}

namespace {

using Clock = std::chrono::steady_clock;

struct Evaluation {
  double f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd g;
  bool ok = false;
};

Evaluation evaluate(const LossFunction& loss, const Eigen::VectorXd& x) {
  Evaluation e;
  e.g = Eigen::VectorXd::Zero(x.size());
  try {
    e.f = loss(x, e.g);
    e.ok = std::isfinite(e.f) && e.g.allFinite();
  } catch (const std::exception&) {
    e.ok = false;
  }
  if (!e.ok) e.f = std::numeric_limits<double>::infinity();
  return e;
}

class Recorder {
 public:
  Recorder(const Callbacks& cb, RunLog& log, Clock::time_point start)
      : cb_(cb), log_(log), start_(start) {
    log_.metric_names = cb.metric_names;
  }

  /// Appends a record; returns false if the callback requests an abort.
  bool record(int iteration, const Eigen::VectorXd& theta, double f, double gnorm) {
    IterationRecord r;
    r.iteration = iteration;
    r.loss = f;
    r.grad_norm = gnorm;
    bool keep_going = true;
    if (cb_.on_iteration) keep_going = cb_.on_iteration(theta, iteration, r.metrics);
    r.metrics.resize(cb_.metric_names.size(), std::numeric_limits<double>::quiet_NaN());
    r.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
    log_.records.push_back(std::move(r));
    return keep_going;
  }

 private:
  const Callbacks& cb_;
  RunLog& log_;
  Clock::time_point start_;
};

/// Minimizer of the cubic interpolating (a, fa, da), (b, fb, db), clamped to
/// the interior of [min(a,b), max(a,b)].
double cubic_min(double a, double fa, double da, double b, double fb, double db) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  double t;
  if (disc >= 0.0 && std::isfinite(disc)) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
  } else {
    t = 0.5 * (a + b);
  }
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (a + b);
  return t;
}

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  Evaluation eval;
};

/// Strong-Wolfe line search along d from (x, f0, g0).
LineSearchResult wolfe_search(const LossFunction& loss, const Eigen::VectorXd& x, double f0,
                              const Eigen::VectorXd& g0, const Eigen::VectorXd& d, double alpha0,
                              const LbfgsConfig& cfg) {
  const double dphi0 = g0.dot(d);
  LineSearchResult res;
  int evals = 0;
  auto phi = [&](double a) {
    ++evals;
    return evaluate(loss, x + a * d);
  };
  auto zoom = [&](double lo, Evaluation elo, double hi, Evaluation ehi) -> LineSearchResult {
    double dlo = elo.g.dot(d);
    while (evals < cfg.max_line_search) {
      double a;
      if (ehi.ok) {
        a = cubic_min(lo, elo.f, dlo, hi, ehi.f, ehi.g.dot(d));
      } else {
        a = 0.5 * (lo + hi);
      }
      Evaluation e = phi(a);
      if (!e.ok || e.f > f0 + cfg.c1 * a * dphi0 || e.f >= elo.f) {
        hi = a;
        ehi = std::move(e);
      } else {
        const double da = e.g.dot(d);
        if (std::abs(da) <= -cfg.c2 * dphi0) return {true, a, std::move(e)};
        if (da * (hi - lo) >= 0.0) {
          hi = lo;
          ehi = elo;
        }
        lo = a;
        elo = std::move(e);
        dlo = da;
      }
      if (std::abs(hi - lo) <= 1e-16 * std::max(1.0, std::abs(lo))) break;
    }
    // Fall back to the best Armijo point found, if it made progress.
    if (lo > 0.0 && elo.ok && elo.f < f0) return {true, lo, std::move(elo)};
    return {};
  };

  double prev = 0.0;
  Evaluation eprev;
  eprev.f = f0;
  eprev.g = g0;
  eprev.ok = true;
  double a = alpha0;
  for (int i = 0; evals < cfg.max_line_search; ++i) {
    Evaluation e = phi(a);
    if (!e.ok) {
      // Overshoot into an invalid region: treat as a failed sufficient-decrease test.
      return zoom(prev, eprev, a, std::move(e));
    }
    if (e.f > f0 + cfg.c1 * a * dphi0 || (i > 0 && e.f >= eprev.f))
      return zoom(prev, eprev, a, std::move(e));
    const double da = e.g.dot(d);
    if (std::abs(da) <= -cfg.c2 * dphi0) return {true, a, std::move(e)};
    if (da >= 0.0) return zoom(a, std::move(e), prev, eprev);
    prev = a;
    eprev = std::move(e);
    a *= 2.0;
  }
  return res;
}

}  // namespace

OptimizeResult lbfgs_minimize(const LossFunction& loss, const Eigen::VectorXd& theta0,
                              const LbfgsConfig& cfg, const Callbacks& callbacks) {
  cfg.validate();
  OptimizeResult out;
  Recorder rec(callbacks, out.log, Clock::now());
  Eigen::VectorXd x = theta0;
  Evaluation cur = evaluate(loss, x);
  out.theta = x;
  out.loss = cur.f;
  if (!cur.ok) {
    out.reason = StopReason::NonFinite;
    out.message = "loss or gradient is not finite at the initial point";
    return out;
  }
  out.grad_norm = cur.g.norm();
  if (!rec.record(0, x, cur.f, out.grad_norm)) {
    out.reason = StopReason::Aborted;
    out.message = "aborted by iteration callback at the initial point";
    return out;
  }
  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> rho;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    if (cur.g.norm() <= cfg.grad_tol) {
      out.reason = StopReason::GradientTolerance;
      out.iterations = it - 1;
      return out;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = cur.g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = rho[i] * S[i].dot(q);
      q -= alpha[i] * Y[i];
    }
    double gamma = 1.0;
    if (!S.empty()) gamma = S.back().dot(Y.back()) / Y.back().squaredNorm();
    Eigen::VectorXd r = gamma * q;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double b = rho[i] * Y[i].dot(r);
      r += S[i] * (alpha[i] - b);
    }
    Eigen::VectorXd d = -r;
    if (!(d.dot(cur.g) < 0.0)) {
      // Not a descent direction: restart from steepest descent.
      S.clear();
      Y.clear();
      rho.clear();
      d = -cur.g;
    }
    const double a0 = S.empty() ? std::min(1.0, 1.0 / cur.g.norm()) : 1.0;
    auto ls = wolfe_search(loss, x, cur.f, cur.g, d, a0, cfg);
    if (!ls.ok) {
      out.reason = StopReason::LineSearchFailure;
      out.message = "line search failed to find a strong-Wolfe step";
      out.iterations = it - 1;
      return out;
    }
    const Eigen::VectorXd s = ls.alpha * d;
    const Eigen::VectorXd y = ls.eval.g - cur.g;
    x += s;
    cur = std::move(ls.eval);
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > cfg.history) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    if (cur.f <= out.loss) {
      out.theta = x;
      out.loss = cur.f;
      out.grad_norm = cur.g.norm();
    }
    out.iterations = it;
    if (!rec.record(it, x, cur.f, cur.g.norm())) {
      out.reason = StopReason::Aborted;
      out.message = "aborted by iteration callback at iteration " + std::to_string(it);
      return out;
    }
  }
  out.reason = cur.g.norm() <= cfg.grad_tol ? StopReason::GradientTolerance : StopReason::MaxIterations;
  return out;
}

OptimizeResult adam_minimize(const LossFunction& loss, const Eigen::VectorXd& theta0,
                             const AdamConfig& cfg, const Callbacks& callbacks) {
  OptimizeResult out;
  Recorder rec(callbacks, out.log, Clock::now());
  Eigen::VectorXd x = theta0;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size()), v = Eigen::VectorXd::Zero(x.size());
  out.theta = x;
  out.loss = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= cfg.max_iter; ++it) {
    Evaluation e = evaluate(loss, x);
    if (!e.ok) {
      out.reason = StopReason::NonFinite;
      out.message = "loss or gradient is not finite at Adam step " + std::to_string(it);
      return out;
    }
    if (e.f <= out.loss) {
      out.theta = x;
      out.loss = e.f;
      out.grad_norm = e.g.norm();
    }
    out.iterations = it;
    if (!rec.record(it, x, e.f, e.g.norm())) {
      out.reason = StopReason::Aborted;
      out.message = "aborted by iteration callback at Adam step " + std::to_string(it);
      return out;
    }
    if (it == cfg.max_iter) break;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * e.g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * e.g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg.beta1, it + 1);
    const double c2 = 1.0 - std::pow(cfg.beta2, it + 1);
    x -= cfg.lr * ((m / c1).array() / ((v / c2).array().sqrt() + cfg.eps)).matrix();
  }
  out.reason = StopReason::MaxIterations;
  return out;
}

OptimizeResult minimize_with_fallback(const LossFunction& loss, const Eigen::VectorXd& theta0,
                                      const LbfgsConfig& cfg, const AdamConfig& adam,
                                      const Callbacks& callbacks) {
  OptimizeResult first = lbfgs_minimize(loss, theta0, cfg, callbacks);
  if (first.reason != StopReason::LineSearchFailure) return first;
  auto append = [](RunLog& into, const RunLog& from, int offset) {
    for (auto r : from.records) {
      r.iteration += offset;
      into.records.push_back(std::move(r));
    }
  };
  OptimizeResult mid = adam_minimize(loss, first.theta, adam, callbacks);
  RunLog log = first.log;
  int offset = first.iterations + 1;
  append(log, mid.log, offset);
  offset += mid.iterations + 1;
  const Eigen::VectorXd start = mid.loss < first.loss ? mid.theta : first.theta;
  if (mid.reason == StopReason::Aborted || mid.reason == StopReason::NonFinite) {
    first.log = log;
    first.reason = mid.reason;
    first.message = mid.message;
    return first;
  }
  LbfgsConfig retry = cfg;
  retry.max_iter = std::max(0, cfg.max_iter - first.iterations);
  OptimizeResult last = lbfgs_minimize(loss, start, retry, callbacks);
  append(log, last.log, offset);
  OptimizeResult best = last;
  if (!(last.loss <= std::min(first.loss, mid.loss))) {
    const OptimizeResult& b = mid.loss < first.loss ? mid : first;
    best.theta = b.theta;
    best.loss = b.loss;
    best.grad_norm = b.grad_norm;
  }
  best.iterations = offset + last.iterations;
  best.log = std::move(log);
  return best;
}

}  // namespace convexnet
