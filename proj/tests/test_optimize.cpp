#include <gtest/gtest.h>

#include <Eigen/Cholesky>
#include <random>
#include <sstream>

#include "convexnet/optimize.hpp"

using namespace convexnet;

namespace {

LossFunction quadratic(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  return [A, b](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = A * x - b;
    return 0.5 * x.dot(A * x) - b.dot(x);
  };
}

double rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  const double a = 1 - x[0], b = x[1] - x[0] * x[0];
  g.resize(2);
  g[0] = -2 * a - 400 * x[0] * b;
  g[1] = 200 * b;
  return a * a + 100 * b * b;
}

}  // namespace

TEST(Lbfgs, SphericalQuadraticConvergesImmediately) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  Eigen::VectorXd a(6);
  for (auto& v : a) v = n(rng);
  LossFunction f = [a](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2 * (x - a);
    return (x - a).squaredNorm();
  };
  LbfgsConfig cfg;
  cfg.grad_tol = 1e-10;
  const auto r = lbfgs_minimize(f, Eigen::VectorXd::Zero(6), cfg);
  EXPECT_EQ(r.reason, StopReason::GradientTolerance);
  EXPECT_LE(r.iterations, 3);
  EXPECT_LT((r.theta - a).norm(), 1e-10);
}

TEST(Lbfgs, Rosenbrock) {
  LbfgsConfig cfg;
  cfg.grad_tol = 1e-9;
  cfg.max_iter = 100;
  const auto r = lbfgs_minimize(rosenbrock, Eigen::Vector2d(-1.2, 1.0), cfg);
  EXPECT_LT((r.theta - Eigen::Vector2d(1, 1)).norm(), 1e-6);
  EXPECT_LE(r.iterations, 100);
}

TEST(Lbfgs, FiniteTerminationOnQuadraticsWithExactLineSearch) {
  // Near-exact line searches (small c2) make full-history L-BFGS a conjugate
  // direction method on quadratics.
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  const int dim = 8;
  Eigen::MatrixXd M(dim, dim);
  for (auto& v : M.reshaped()) v = n(rng);
  const Eigen::MatrixXd A = M * M.transpose() + Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd b(dim);
  for (auto& v : b) v = n(rng);
  LbfgsConfig cfg;
  cfg.history = dim;
  cfg.c1 = 1e-8;
  cfg.c2 = 1e-6;
  cfg.grad_tol = 1e-9;
  const auto r = lbfgs_minimize(quadratic(A, b), Eigen::VectorXd::Zero(dim), cfg);
  EXPECT_EQ(r.reason, StopReason::GradientTolerance);
  EXPECT_LE(r.iterations, dim + 2);
  EXPECT_LT((r.theta - A.ldlt().solve(b)).norm(), 1e-8);
}

TEST(Lbfgs, AcceptedStepsSatisfyArmijoAndLossDecreases) {
  LbfgsConfig cfg;
  cfg.max_iter = 40;
  std::vector<double> losses;
  const auto r = lbfgs_minimize(rosenbrock, Eigen::Vector2d(-1.2, 1.0), cfg);
  for (std::size_t i = 1; i < r.log.records.size(); ++i)
    EXPECT_LT(r.log.records[i].loss, r.log.records[i - 1].loss);
}

TEST(Lbfgs, NonFiniteTrialPointsAreBacktracked) {
  // log barrier: undefined for x ≤ 0, minimum at x = 1.
  LossFunction f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    if (x[0] <= 0) return std::numeric_limits<double>::quiet_NaN();
    g.resize(1);
    g[0] = 1.0 - 1.0 / x[0];
    return x[0] - std::log(x[0]);
  };
  LbfgsConfig cfg;
  cfg.grad_tol = 1e-10;
  const auto r = lbfgs_minimize(f, Eigen::VectorXd::Constant(1, 0.05), cfg);
  EXPECT_NEAR(r.theta[0], 1.0, 1e-8);
}

TEST(Lbfgs, CallbackAbortAndNonFiniteStart) {
  Callbacks cb;
  cb.metric_names = {"x0"};
  cb.on_iteration = [](const Eigen::VectorXd& t, int it, std::vector<double>& m) {
    m.push_back(t[0]);
    return it < 3;
  };
  const auto r = lbfgs_minimize(rosenbrock, Eigen::Vector2d(-1.2, 1.0), LbfgsConfig{}, cb);
  EXPECT_EQ(r.reason, StopReason::Aborted);
  EXPECT_EQ(r.log.records.size(), 4u);
  LossFunction bad = [](const Eigen::VectorXd&, Eigen::VectorXd& g) {
    g = Eigen::VectorXd::Zero(1);
    return std::numeric_limits<double>::infinity();
  };
  EXPECT_EQ(lbfgs_minimize(bad, Eigen::VectorXd::Zero(1), LbfgsConfig{}).reason, StopReason::NonFinite);
}

TEST(Lbfgs, DeterministicLogs) {
  auto run = [] {
    std::ostringstream s;
    lbfgs_minimize(rosenbrock, Eigen::Vector2d(-1.2, 1.0), LbfgsConfig{}).log.write_csv(s);
    return s.str();
  };
  EXPECT_EQ(run(), run());
}

TEST(Lbfgs, RejectsInvalidWolfeConstants) {
  LbfgsConfig cfg;
  cfg.c1 = 0.5;
  cfg.c2 = 0.4;
  EXPECT_THROW(lbfgs_minimize(rosenbrock, Eigen::Vector2d(0, 0), cfg), std::invalid_argument);
}

TEST(Adam, ZeroLearningRateAndQuadraticOptimum) {
  const Eigen::Matrix2d A = (Eigen::Matrix2d() << 3, 1, 1, 2).finished();
  const Eigen::Vector2d b(1, -1);
  AdamConfig cfg;
  cfg.lr = 0.0;
  cfg.max_iter = 10;
  EXPECT_EQ(adam_minimize(quadratic(A, b), Eigen::Vector2d(0.3, 0.2), cfg).theta,
            Eigen::Vector2d(0.3, 0.2));
  cfg.lr = 0.01;
  cfg.max_iter = 5000;
  const auto r = adam_minimize(quadratic(A, b), Eigen::Vector2d::Zero(), cfg);
  EXPECT_LT((r.theta - A.ldlt().solve(b)).norm(), 1e-4);
  // Monotone decrease until the iterates reach the noise floor around the optimum.
  const double fmin = -0.5 * b.dot(A.ldlt().solve(b));
  cfg.lr = 1e-3;
  const auto slow = adam_minimize(quadratic(A, b), Eigen::Vector2d::Zero(), cfg);
  int increases = 0;
  for (std::size_t i = 1; i < slow.log.records.size(); ++i)
    if (slow.log.records[i - 1].loss - fmin > 1e-8)
      increases += slow.log.records[i].loss > slow.log.records[i - 1].loss;
  EXPECT_EQ(increases, 0);
}

TEST(Fallback, RunsAdamAfterLineSearchFailure) {
  // |x| has no strong-Wolfe step near its kink.
  LossFunction f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(1);
    g[0] = x[0] > 0 ? 1.0 : -1.0;
    return std::abs(x[0]);
  };
  LbfgsConfig cfg;
  cfg.max_iter = 50;
  AdamConfig adam;
  adam.max_iter = 20;
  const auto r = minimize_with_fallback(f, Eigen::VectorXd::Constant(1, 0.3), cfg, adam);
  EXPECT_LT(std::abs(r.theta[0]), 0.3);
  EXPECT_GT(r.log.records.size(), 20u);
}
