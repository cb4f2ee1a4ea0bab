#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "convexnet/autodiff/differentiate.hpp"
#include "convexnet/autodiff/value_grad.hpp"
#include "convexnet/geometry.hpp"
#include "convexnet/oracles.hpp"

using namespace convexnet;
constexpr double pi = std::numbers::pi;

namespace {

SublinearNet smooth_net(int d, std::uint64_t seed) {
  // Directions of varying length give visibly non-round bodies.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  const int m = 12;
  Eigen::MatrixXd W(d, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < d; ++i) W(i, j) = 1.2 * n(rng);
  return normalize_scale(SublinearNet(0.0, W), sphere_rule(d, 512));
}

Eigen::VectorXd unit(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = n(rng);
  return x.normalized();
}

template <class F>
Eigen::MatrixXd fd_jacobian(const ConvexBody<F>& body, const Point& x, double h) {
  const int d = body.dim();
  Eigen::MatrixXd J(d, d);
  for (int k = 0; k < d; ++k) {
    Point e = Point::Zero(d);
    e[k] = h;
    J.col(k) = (values(map(body, x + e)) - values(map(body, x - e))) / (2 * h);
  }
  return J;
}

}  // namespace

TEST(Map, BallOraclesAndOrigin) {
  const auto g = make_body(QuadraticNorm::ball(2, 2.0), BodyKind::Gauge);
  const Point x = Eigen::Vector2d(0.3, -0.4);
  EXPECT_LT((values(map(g, x)) - x / 2).norm(), 1e-15);
  const auto s = make_body(QuadraticNorm::ball(3, 1.7), BodyKind::Support);
  const Point x3 = Eigen::Vector3d(0.1, 0.5, -0.2);
  EXPECT_LT((values(map(s, x3)) - 1.7 * x3).norm(), 1e-14);
  EXPECT_EQ(values(map(s, Point::Zero(3))).norm(), 0.0);
}

TEST(Map, SmoothedSquareGauge) {
  const auto body = make_body(as_function(from_polytope_gauge(cube(2).facets, 1e-3)), BodyKind::Gauge);
  const Eigen::VectorXd y = values(map(body, Eigen::Vector2d(1, 0)));
  EXPECT_LT((y - Eigen::Vector2d(1, 0)).norm(), 1e-2);
}

TEST(Map, NonPositiveFunctionIsInvalid) {
  Eigen::MatrixXd W(2, 1);
  W << 1, 0;
  const auto body = make_body(as_function(SublinearNet(0.0, W)), BodyKind::Gauge);
  EXPECT_THROW(map(body, Eigen::Vector2d(-1, 0)), InvalidBodyError);
}

TEST(InverseGauge, RoundTrip) {
  const auto ball = make_body(QuadraticNorm::ball(3, 1.0), BodyKind::Gauge);
  const Point y = Eigen::Vector3d(0.2, -0.3, 0.4);
  EXPECT_LT((inverse_gauge(ball, y) - y).norm(), 1e-15);
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto body = make_body(as_function(smooth_net(3, seed)), BodyKind::Gauge);
    const Point x = 0.7 * unit(3, rng);
    const Point yy = values(map(body, x));
    EXPECT_LT((values(map(body, inverse_gauge(body, yy))) - yy).norm(), 1e-10);
    const Point on_boundary = values(map(body, unit(3, rng)));
    EXPECT_NEAR(inverse_gauge(body, on_boundary).norm(), 1.0, 1e-10);
  }
  const auto sup = make_body(QuadraticNorm::ball(2, 1.0), BodyKind::Support);
  EXPECT_THROW(inverse_gauge(sup, Eigen::Vector2d(1, 0)), UnsupportedError);
}

TEST(BoundaryFrame, IdentityAndScaling) {
  std::mt19937_64 rng(2);
  for (int d = 2; d <= 4; ++d) {
    const Point x = unit(d, rng);
    const auto id = boundary_frame(make_body(QuadraticNorm::ball(d, 1.0), BodyKind::Gauge), x);
    EXPECT_LT((values(id.n) - x).norm(), 1e-14);
    EXPECT_NEAR(id.jac, 1.0, 1e-14);
    EXPECT_NEAR(id.surf_jac, 1.0, 1e-14);
    const double r = 1.6;
    for (auto kind : {BodyKind::Gauge, BodyKind::Support}) {
      const double scale = kind == BodyKind::Gauge ? 1.0 / r : r;
      const auto f = boundary_frame(make_body(QuadraticNorm::ball(d, scale), kind), x);
      EXPECT_NEAR(f.jac, std::pow(r, d), 1e-12);
      EXPECT_NEAR(f.surf_jac, std::pow(r, d - 1), 1e-12);
      EXPECT_LT((values(f.n) - x).norm(), 1e-14);
    }
  }
}

TEST(BoundaryFrame, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int d = 2; d <= 4; ++d)
    for (auto kind : {BodyKind::Gauge, BodyKind::Support})
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto body = make_body(as_function(smooth_net(d, 10 * d + seed)), kind);
        const Point x = 0.8 * unit(d, rng);
        const auto m = local_map(body, x, true);
        const Eigen::MatrixXd J = values(m.J);
        const Eigen::MatrixXd fd = fd_jacobian(body, x, 1e-5);
        EXPECT_LT((J - fd).norm(), 1e-5 * J.norm());
        for (int k = 0; k < d; ++k) {
          Point e = Point::Zero(d);
          e[k] = 1e-5;
          const Eigen::MatrixXd dfd =
              (values(local_map(body, x + e, false).J) - values(local_map(body, x - e, false).J)) / 2e-5;
          EXPECT_LT((values(m.dJ[k]) - dfd).norm(), 1e-5 * (1 + dfd.norm()));
        }
      }
}

TEST(BoundaryFrame, NormalIsOrthogonalToImageTangents) {
  std::mt19937_64 rng(4);
  for (auto kind : {BodyKind::Gauge, BodyKind::Support})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto body = make_body(as_function(smooth_net(3, 100 + seed)), kind);
      const Point x = unit(3, rng);
      const auto f = boundary_frame(body, x);
      EXPECT_NEAR(values(f.n).norm(), 1.0, 1e-12);
      EXPECT_GT(f.jac, 0.0);
      // Tangent curves t ↦ φ(normalize(x + t v)) with v ⟂ x.
      for (int k = 0; k < 2; ++k) {
        Point v = unit(3, rng);
        v -= v.dot(x) * x;
        const double h = 1e-5;
        const Point t = (values(map(body, (x + h * v).normalized())) -
                         values(map(body, (x - h * v).normalized()))) /
                        (2 * h);
        EXPECT_LT(std::abs(values(f.n).dot(t)), 1e-8 * std::max(1.0, t.norm()));
      }
      if (kind == BodyKind::Gauge) {
        // Normal parallel to ∇p at the image point.
        const Eigen::VectorXd g = body.fn.derivatives(values(f.y), 1).grad;
        EXPECT_GE(g.normalized().dot(values(f.n)), 1.0 - 1e-8);
      } else {
        // Support parametrization: the normal at φ(u) is u.
        EXPECT_LT((values(f.n) - x).norm(), 1e-8);
      }
    }
}

TEST(Weingarten, BallCurvatures) {
  std::mt19937_64 rng(5);
  for (int d = 2; d <= 4; ++d) {
    const double r = 0.7;
    for (auto kind : {BodyKind::Gauge, BodyKind::Support}) {
      const auto body =
          make_body(QuadraticNorm::ball(d, kind == BodyKind::Gauge ? 1.0 / r : r), kind);
      for (int t = 0; t < 5; ++t) {
        const auto c = curvature_frame(body, unit(d, rng));
        EXPECT_LT((values(c.S_) - Eigen::MatrixXd::Identity(d - 1, d - 1) / r).norm(), 1e-10);
        EXPECT_NEAR(c.mean, 1.0 / r, 1e-6 / r);
        EXPECT_NEAR(c.gauss, std::pow(r, 1 - d), 1e-6 * std::pow(r, 1 - d));
      }
    }
  }
  // Householder degeneracy at n = e_d.
  const auto c = curvature_frame(make_body(QuadraticNorm::ball(3, 2.0), BodyKind::Support),
                                 Eigen::Vector3d(0, 0, 1));
  EXPECT_LT((values(c.S_) - Eigen::Matrix2d::Identity() / 2).norm(), 1e-12);
}

TEST(Weingarten, EllipseVertexCurvature) {
  const auto body = make_body(QuadraticNorm::ellipsoid_support(Eigen::Vector2d(2, 1)), BodyKind::Support);
  const auto c = curvature_frame(body, Eigen::Vector2d(1, 0));
  EXPECT_LT((values(c.frame.y) - Eigen::Vector2d(2, 0)).norm(), 1e-14);
  EXPECT_NEAR(c.gauss, 2.0, 1e-12);
  EXPECT_NEAR(c.mean, 2.0, 1e-12);
}

TEST(Weingarten, EllipsoidGaussianCurvature) {
  const Eigen::Vector3d axes(1.3, 1.0, 0.8);
  std::mt19937_64 rng(6);
  const auto sup = make_body(QuadraticNorm::ellipsoid_support(axes), BodyKind::Support);
  const auto gau = make_body(QuadraticNorm::ellipsoid_gauge(axes), BodyKind::Gauge);
  const double abc2 = std::pow(axes.prod(), 2);
  for (int t = 0; t < 20; ++t) {
    const Point u = unit(3, rng);
    const double h = sup.fn.value(u);
    EXPECT_NEAR(gaussian_curvature(sup, u), std::pow(h, 4) / abc2, 1e-10);
    // Same surface via the gauge map, evaluated at its normal.
    const auto f = curvature_frame(gau, u);
    const Point n = values(f.frame.n);
    EXPECT_NEAR(f.gauss, std::pow(sup.fn.value(n), 4) / abc2, 1e-9);
  }
}

TEST(Weingarten, SymmetricOnRandomBodies) {
  std::mt19937_64 rng(7);
  for (int d = 3; d <= 4; ++d)
    for (auto kind : {BodyKind::Gauge, BodyKind::Support})
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto body = make_body(as_function(smooth_net(d, 200 + seed)), kind);
        const Eigen::MatrixXd S = values(weingarten(body, unit(d, rng)));
        EXPECT_LT((S - S.transpose()).norm(), 1e-8);
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (S + S.transpose()))
                      .eigenvalues()
                      .minCoeff(),
                  0.0);
      }
}

TEST(Integrals, BallsAndPolytopeLimit) {
  const auto b2 = ball_rule(2, 16, sphere_rule(2, 256));
  const auto unit2 = make_body(QuadraticNorm::ball(2, 1.0), BodyKind::Gauge);
  EXPECT_NEAR(volume(unit2, b2), pi, 1e-6);
  EXPECT_NEAR(surface_area(unit2, b2.sphere), 2 * pi, 1e-6);
  const auto b3 = ball_rule(3, 16, sphere_rule(3, 2048));
  EXPECT_NEAR(volume(make_body(QuadraticNorm::ball(3, 2.0), BodyKind::Gauge), b3), pi / 6, 1e-5);
  const auto square = make_body(as_function(from_polytope_gauge(cube(2).facets, 1e-3)), BodyKind::Gauge);
  EXPECT_NEAR(volume(square, ball_rule(2, 16, sphere_rule(2, 4096))), 4.0, 1e-2);
  // Volume integral of a constant and of ‖y‖².
  const auto r2 = make_body(QuadraticNorm::ball(2, 0.5), BodyKind::Gauge);
  EXPECT_NEAR(volume_integral(r2, [](const auto&) { return 1.0; }, b2), 4 * pi, 1e-10);
  EXPECT_NEAR(volume_integral(r2, [](const auto& y) { return y.squaredNorm(); }, b2), 8 * pi, 1e-8);
}

TEST(Polar, BallsAndInvolution) {
  const auto b2 = ball_rule(2, 16, sphere_rule(2, 256));
  const auto body = make_body(QuadraticNorm::ball(2, 0.5), BodyKind::Gauge);  // radius 2
  const auto pol = polar_body(body);
  EXPECT_EQ(pol.kind, BodyKind::Support);
  EXPECT_NEAR(volume(pol, b2), pi / 4, 1e-10);
  EXPECT_EQ(polar_body(pol).kind, body.kind);
  const auto disk = make_body(QuadraticNorm::ball(2, 1.0), BodyKind::Gauge);
  EXPECT_NEAR(volume(disk, b2) * volume(polar_body(disk), b2), pi * pi, 1e-10);
}

TEST(Identities, DivergenceAndTotalCurvature) {
  const auto s2 = sphere_rule(2, 256);
  const auto br2 = ball_rule(2, 16, s2);
  const auto s3 = sphere_rule(3, 2048);
  const auto br3 = ball_rule(3, 16, s3);
  for (auto kind : {BodyKind::Gauge, BodyKind::Support})
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto body2 = make_body(as_function(smooth_net(2, 300 + seed)), kind);
      const double flux = surface_integral(body2, [](const auto& f) { return f.y.dot(f.n); }, s2);
      EXPECT_NEAR(flux / (2 * volume(body2, br2)), 1.0, 1e-4);
      const double tc = curvature_integral(body2, [](const auto& c) { return c.mean; }, s2);
      EXPECT_NEAR(tc / (2 * pi), 1.0, 1e-3);
      const auto body3 = make_body(as_function(smooth_net(3, 400 + seed)), kind);
      const double flux3 = surface_integral(body3, [](const auto& f) { return f.y.dot(f.n); }, s3);
      EXPECT_NEAR(flux3 / (3 * volume(body3, br3)), 1.0, 1e-4);
      const double gb = curvature_integral(body3, [](const auto& c) { return c.gauss; }, s3);
      EXPECT_NEAR(gb / (4 * pi), 1.0, 1e-2);
    }
}

TEST(Volume, ParameterGradientMatchesFiniteDifferences) {
  const auto rule = ball_rule(3, 8, sphere_rule(3, 256));
  for (auto kind : {BodyKind::Gauge, BodyKind::Support}) {
    const auto net = smooth_net(3, 55);
    const auto theta = net.flatten();
    ad::ParameterTape tape(theta);
    const auto P = NetParams<ad::Var>::from_flat(3, net.directions, tape.params());
    const auto body = make_body(NetFunction<ad::Var>(P), kind);
    ad::ValueGrad acc;
    const auto& sph = rule.sphere;
    for (Eigen::Index i = 0; i < sph.size(); ++i)
      tape.accumulate(jacobian_determinant(body, sph.nodes.col(i)), sph.weights[i] / 3.0, acc);
    auto f = [&](const Eigen::VectorXd& t) {
      const auto n = SublinearNet::unflatten(3, net.directions, std::vector<double>(t.data(), t.data() + t.size()));
      return volume(make_body(as_function(n), kind), rule);
    };
    const Eigen::VectorXd th = Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size());
    EXPECT_NEAR(acc.value, f(th), 1e-12);
    EXPECT_LT(ad::check_gradient(f, acc.grad, th, 1e-5).max_rel_error, 1e-4);
  }
}

TEST(Hausdorff, BallsAndBetaSweep) {
  const auto a = make_body(QuadraticNorm::ball(2, 1.0), BodyKind::Gauge);
  const auto b = make_body(QuadraticNorm::ball(2, 1.0 / 1.2), BodyKind::Gauge);
  const auto h = hausdorff_estimate(a, b, 1000);
  EXPECT_TRUE(h.is_upper_bound);
  EXPECT_NEAR(h.value, 0.2, 1e-6);
  EXPECT_EQ(hausdorff_estimate(a, a, 1000).value, 0.0);
  const auto sa = make_body(QuadraticNorm::ball(2, 1.0), BodyKind::Support);
  const auto sb = make_body(QuadraticNorm::ball(2, 1.2), BodyKind::Support);
  EXPECT_NEAR(hausdorff_estimate(sa, sb, 1000).value, 0.2, 1e-6);
  const auto P = cube(2);
  const PolytopeFunction exact(P, true);
  const ConvexBody<PolytopeFunction> target{exact, BodyKind::Gauge};
  auto est = [&](double beta) {
    return hausdorff_estimate(make_body(as_function(from_polytope_gauge(P.facets, beta)), BodyKind::Gauge),
                              target, 10000)
        .value;
  };
  EXPECT_LE(est(0.005) / est(0.01), 0.6);
}

TEST(Export, ObjMeshIsWatertight) {
  const int rows = 8, cols = 12;
  const auto tri = uv_sphere_triangles(rows, cols);
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : tri)
    for (int e = 0; e < 3; ++e) ++edges[{t[e], t[(e + 1) % 3]}];
  for (const auto& [e, count] : edges) {
    EXPECT_EQ(count, 1);
    EXPECT_EQ(edges.count({e.second, e.first}), 1u);
  }
  const auto body = make_body(QuadraticNorm::ball(3, 1.0), BodyKind::Gauge);
  const auto mesh = boundary_mesh(body, rows, cols);
  EXPECT_EQ(mesh.vertices.cols(), rows * cols);
  // Outward orientation: signed volume of the mesh is positive.
  double vol = 0.0;
  for (const auto& t : tri)
    vol += mesh.vertices.col(t[0]).dot(
        Eigen::Vector3d(mesh.vertices.col(t[1])).cross(Eigen::Vector3d(mesh.vertices.col(t[2])))) / 6;
  EXPECT_GT(vol, 0.0);
  EXPECT_EQ(mesh_obj(mesh), mesh_obj(boundary_mesh(body, rows, cols)));
}

TEST(Export, PolylineOnUnitCircle) {
  const auto body = make_body(QuadraticNorm::ball(2, 1.0), BodyKind::Gauge);
  const auto pts = boundary_polyline(body, 256);
  EXPECT_EQ(pts.cols(), 256);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) EXPECT_NEAR(pts.col(i).norm(), 1.0, 1e-10);
}
