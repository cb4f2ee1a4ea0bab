#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "convexnet/errors.hpp"
#include "convexnet/quadrature.hpp"

using namespace convexnet;
constexpr double pi = std::numbers::pi;

TEST(SphereRule, WeightsSumToArea) {
  for (int d = 2; d <= 4; ++d) {
    const auto r = sphere_rule(d, 500);
    EXPECT_NEAR(r.weights.sum(), sphere_area(d), 1e-12 * sphere_area(d));
    for (Eigen::Index i = 0; i < r.size(); ++i) EXPECT_NEAR(r.nodes.col(i).norm(), 1.0, 1e-14);
  }
  EXPECT_NEAR(integrate(sphere_rule(2, 100), [](const auto&) { return 1.0; }), 2 * pi, 1e-13);
}

TEST(SphereRule, MomentsOfTheTwoSphere) {
  const auto r = sphere_rule(3, 2000);
  const double m2 = integrate(r, [](const Eigen::VectorXd& x) { return x[2] * x[2]; });
  EXPECT_NEAR(m2 / (4 * pi / 3), 1.0, 1e-3);
  EXPECT_NEAR(integrate(r, [](const Eigen::VectorXd& x) { return x[2]; }), 0.0, 1e-3);
}

TEST(SphereRule, ThreeSphereMoments) {
  // ∫_{S³} x_i² = 2π²/4.
  const auto r = sphere_rule(4, 8192);
  for (int i = 0; i < 4; ++i) {
    const double m = integrate(r, [i](const Eigen::VectorXd& x) { return x[i] * x[i]; });
    EXPECT_NEAR(m / (pi * pi / 2), 1.0, 2e-3);
  }
}

TEST(SphereRule, DoublingReducesErrorOnSmoothIntegrand) {
  // Along the lattice axis the rule is a midpoint rule in z: ∫_{S²} exp(x₃) = 4π sinh(1).
  const double exact = 4 * pi * std::sinh(1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int n = 64; n <= 65536; n *= 2) {
    const auto r = sphere_rule(3, n);
    const double err =
        std::abs(integrate(r, [](const Eigen::VectorXd& x) { return std::exp(x[2]); }) - exact);
    if (prev < 1e-10) break;
    EXPECT_LE(err, prev / 2) << "n = " << n;
    prev = err;
  }
}

TEST(SphereRule, OffAxisErrorStaysWithinFirstOrderEnvelope) {
  // Across the axis the spiral's error fluctuates; it stays below 2/N.
  const double exact = 4 * pi * std::sinh(1.0);
  for (int n = 64; n <= 65536; n *= 2) {
    const auto r = sphere_rule(3, n);
    const double err =
        std::abs(integrate(r, [](const Eigen::VectorXd& x) { return std::exp(x[0]); }) - exact);
    EXPECT_LE(err, 2.0 / n) << "n = " << n;
  }
}

TEST(SphereRule, Reproducible) {
  const auto a = sphere_rule(4, 300);
  const auto b = sphere_rule(4, 300);
  EXPECT_EQ(a.nodes, b.nodes);
}

TEST(SphereRule, RejectsUnsupportedDimension) {
  EXPECT_THROW(sphere_rule(5, 100), UnsupportedError);
  EXPECT_THROW(sphere_rule(1, 100), UnsupportedError);
}

TEST(BallRule, VolumeAndRadialMoment) {
  for (int d = 2; d <= 4; ++d) {
    const auto b = ball_rule(d, 16, sphere_rule(d, 256));
    EXPECT_NEAR(b.weights.sum() / ball_volume(d), 1.0, 1e-12);
    const double m = integrate(b, [](const Eigen::VectorXd& x) { return x.squaredNorm(); });
    EXPECT_NEAR(m, d * ball_volume(d) / (d + 2), 1e-8);
  }
  const auto b2 = ball_rule(2, 8, sphere_rule(2, 64));
  EXPECT_NEAR(integrate(b2, [](const auto&) { return 3.0; }), 3 * pi, 1e-12);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  Eigen::VectorXd t, w;
  gauss_legendre(6, t, w);
  for (int k = 0; k <= 11; ++k) {
    double s = 0.0;
    for (int i = 0; i < 6; ++i) s += w[i] * std::pow(t[i], k);
    EXPECT_NEAR(s, k % 2 ? 0.0 : 2.0 / (k + 1), 1e-14);
  }
}
