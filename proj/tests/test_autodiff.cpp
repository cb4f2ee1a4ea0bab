#include <gtest/gtest.h>

#include <cmath>

#include "convexnet/autodiff/differentiate.hpp"
#include "convexnet/autodiff/value_grad.hpp"

using namespace convexnet::ad;

TEST(Gradient, SquaredNorm) {
  auto f = [](const auto& x) { return x[0] * x[0] + x[1] * x[1]; };
  const auto g = gradient<2>(f, Eigen::Vector2d(1, 2));
  EXPECT_DOUBLE_EQ(g[0], 2.0);
  EXPECT_DOUBLE_EQ(g[1], 4.0);
}

TEST(Gradient, LogSumExpAtOrigin) {
  auto f = [](const auto& x) {
    using std::exp;
    using std::log;
    return log(exp(x[0]) + exp(x[1]));
  };
  const auto g = gradient<2>(f, Eigen::Vector2d(0, 0));
  EXPECT_NEAR(g[0], 0.5, 1e-15);
  EXPECT_NEAR(g[1], 0.5, 1e-15);
}

namespace {
template <class T>
T rosenbrock(const std::array<T, 2>& x) {
  const T a = 1.0 - x[0];
  const T b = x[1] - x[0] * x[0];
  return a * a + 100.0 * b * b;
}
}  // namespace

TEST(Gradient, RosenbrockMatchesFiniteDifferences) {
  const Eigen::Vector2d x(-1.2, 1.0);
  const auto g = gradient<2>([](const auto& v) { return rosenbrock(v); }, x);
  auto fd = [](const Eigen::VectorXd& v) { return rosenbrock<double>({v[0], v[1]}); };
  const auto rep = check_gradient(fd, Eigen::VectorXd(g), Eigen::VectorXd(x), 1e-5);
  EXPECT_LT(rep.max_rel_error, 1e-6);
  // Hand derivative.
  EXPECT_NEAR(g[0], -215.6, 1e-10);
  EXPECT_NEAR(g[1], -88.0, 1e-10);
}

TEST(Jacobian, LinearAndQuadraticMaps) {
  auto twice = [](const auto& x) {
    auto y = x;
    for (auto& v : y) v = 2.0 * v;
    return y;
  };
  EXPECT_TRUE(jacobian<3>(twice, Eigen::Vector3d(0.3, -1, 2)).isApprox(2.0 * Eigen::Matrix3d::Identity()));
  auto quad = [](const auto& x) {
    auto y = x;
    y[0] = x[0] * x[0];
    y[1] = x[0] * x[1];
    return y;
  };
  Eigen::Matrix2d expected;
  expected << 2, 0, 3, 1;
  EXPECT_TRUE(jacobian<2>(quad, Eigen::Vector2d(1, 3)).isApprox(expected));
}

TEST(CheckGradient, SquaredNorm) {
  auto f = [](const Eigen::VectorXd& v) { return v.squaredNorm(); };
  Eigen::VectorXd x(2);
  x << 1, 2;
  EXPECT_LT(check_gradient(f, 2.0 * x, x, 1e-5).max_rel_error, 1e-8);
}

TEST(Jet, ProductAndChainRulesOnPolynomials) {
  using J = Jet<double, 1>;
  const J x = J::variable(1.5, 0);
  const J p = 3.0 * x * x * x - 2.0 * x + 7.0;
  EXPECT_DOUBLE_EQ(p.a, 3 * 1.5 * 1.5 * 1.5 - 3.0 + 7.0);
  EXPECT_DOUBLE_EQ(p.v[0], 9 * 1.5 * 1.5 - 2.0);
  const J q = p / (x + 1.0);
  EXPECT_NEAR(q.v[0], ((9 * 2.25 - 2) * 2.5 - (3 * 3.375 - 3 + 7)) / 6.25, 1e-14);
}

TEST(Jet, NestedHessianAndThirdDerivative) {
  auto f = [](const auto& x) {
    using std::exp;
    return exp(x[0]) * x[1] * x[1] + x[0] * x[0] * x[0] * x[1];
  };
  const Eigen::Vector2d x(0.4, -0.7);
  const auto h = hessian<2>(f, x);
  const double e = std::exp(0.4);
  EXPECT_NEAR(h(0, 0), e * 0.49 + 6 * 0.4 * -0.7, 1e-13);
  EXPECT_NEAR(h(0, 1), 2 * e * -0.7 + 3 * 0.16, 1e-13);
  EXPECT_NEAR(h(1, 1), 2 * e, 1e-13);
  // Third directional derivative along (a, b):
  // f_xxx a³ + 3 f_xxy a²b + 3 f_xyy ab² + f_yyy b³.
  const Eigen::Vector2d dir(0.6, -1.1);
  const double fxxx = e * 0.49 + 6 * -0.7;
  const double fxxy = e * 2 * -0.7 + 6 * 0.4;
  const double fxyy = 2 * e;
  const double a = dir[0], b = dir[1];
  const double expected = fxxx * a * a * a + 3 * fxxy * a * a * b + 3 * fxyy * a * b * b;
  EXPECT_NEAR(third_directional<2>(f, x, dir), expected, 1e-12);
}

TEST(Var, ReverseModeMatchesForwardMode) {
  ParameterTape tape(std::vector<double>{0.3, -1.2, 2.0});
  const auto& p = tape.params();
  ValueGrad acc;
  for (int k = 0; k < 3; ++k) {
    const Var y = exp(p[0] * p[1]) + sqrt(p[2] * p[2] + 1.0) / (1.0 + p[k] * p[k]);
    tape.accumulate(y, 0.5, acc);
  }
  auto f = [](const Eigen::VectorXd& t) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k)
      s += 0.5 * (std::exp(t[0] * t[1]) + std::sqrt(t[2] * t[2] + 1.0) / (1.0 + t[k] * t[k]));
    return s;
  };
  Eigen::VectorXd t(3);
  t << 0.3, -1.2, 2.0;
  EXPECT_NEAR(acc.value, f(t), 1e-14);
  EXPECT_LT(check_gradient(f, acc.grad, t, 1e-6).max_rel_error, 1e-8);
  EXPECT_EQ(Tape::current().size(), 3u);
}

TEST(ValueGrad, QuotientRule) {
  const ValueGrad a(2.0, Eigen::Vector2d(1, 0));
  const ValueGrad b(4.0, Eigen::Vector2d(0, 1));
  const auto q = a / b;
  EXPECT_DOUBLE_EQ(q.value, 0.5);
  EXPECT_DOUBLE_EQ(q.grad[0], 0.25);
  EXPECT_DOUBLE_EQ(q.grad[1], -2.0 / 16.0);
}
