#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "convexnet/errors.hpp"
#include "convexnet/experiments.hpp"
#include "convexnet/expression.hpp"

using namespace convexnet;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  return parse_experiment_config(ConfigTable::parse(text));
}

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& s) {
  for (const auto& p : problems)
    if (p.find(s) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Metrics text without the wall-clock line.
std::string without_runtime(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("runtime", 0) != 0) out += line + "\n";
  return out;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("convexnet_test_" + name);
  fs::remove_all(dir);
  return dir;
}

// W = 0 makes p(x) = β‖x‖ log m exactly; β = 1/log m gives the unit ball.
SymmetrizedNet unit_ball_net(int d, int m) {
  return {SublinearNet(-std::log(std::log(static_cast<double>(m))), Eigen::MatrixXd::Zero(d, m)),
          SymmetryGroup::trivial(d)};
}

const char* kSmallFit =
    "experiment = \"fit\"\n"
    "dim = 2\n"
    "seed = 3\n"
    "[net]\ndirections = 8\n"
    "[fit]\ntarget = \"polygon:5\"\nsigma = 0.01\nn_samples = 60\n"
    "[optimizer]\nmax_iter = 15\n"
    "[quadrature]\nsphere = 64\n";

}  // namespace

TEST(ExperimentConfig, ExperimentDefaultsAreResolved) {
  const auto fit = parse("experiment = \"fit\"\n");
  EXPECT_EQ(fit.dim, 3);
  EXPECT_EQ(fit.net.directions, 128);
  EXPECT_EQ(fit.net.kind, "gauge");
  EXPECT_EQ(fit.net.seed, fit.seed + 1000003);
  EXPECT_EQ(fit.fit.target, "octahedron");
  EXPECT_EQ(fit.quadrature.sphere, default_sphere_n(3));
  EXPECT_EQ(fit.output.resolution, 64);

  const auto mk = parse("experiment = \"minkowski\"\n");
  EXPECT_EQ(mk.net.kind, "support");
  EXPECT_EQ(mk.minkowski.axes, (std::vector<double>{1.3, 1.0, 0.8}));

  const auto tg = parse("experiment = \"torsion-gradient\"\n[torsion]\nx_star = [3, 4]\n");
  EXPECT_EQ(tg.dim, 2);
  EXPECT_NEAR(tg.torsion.x_star[0], 0.6, 1e-15);
  EXPECT_NEAR(tg.torsion.x_star[1], 0.8, 1e-15);
  EXPECT_EQ(tg.pde.mfs_n0, 64);

  const auto mh = parse("experiment = \"mahler\"\n");
  EXPECT_EQ(mh.net.symmetry, 4);
  EXPECT_EQ(mh.net.init_scale, 3.0);

  const auto st = parse("experiment = \"fit-stats\"\n[stats]\nvary = \"n_samples\"\n");
  EXPECT_EQ(st.stats.values, (std::vector<double>{10, 100, 1000, 10000}));
}

TEST(ExperimentConfig, ResolvedTextRoundTrips) {
  for (const auto& name : experiment_names()) {
    const auto cfg = parse("experiment = \"" + name + "\"\n");
    const auto text = resolved_config_text(cfg);
    EXPECT_EQ(resolved_config_text(parse(text)), text) << name;
  }
}

TEST(ExperimentConfig, UnknownKeyIsNamed) {
  const auto p = problems_of("experiment = \"fit\"\n[net]\ndirectoins = 5\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_NE(p[0].find("unknown key 'net.directoins'"), std::string::npos);
  EXPECT_NE(p[0].find("line 3"), std::string::npos);
}

TEST(ExperimentConfig, ReportsAllProblemsAtOnce) {
  const auto p = problems_of(
      "experiment = \"fit\"\n"
      "bogus = 1\n"
      "dim = 2.5\n"
      "[net]\nkind = 3\n"
      "[fit]\nsigma = -1\nacc_samples = 100\ntarget = \"dodecagon\"\n"
      "[optimizer]\nc1 = 0.95\nmethod = \"sgd\"\n");
  EXPECT_TRUE(mentions(p, "unknown key 'bogus'"));
  EXPECT_TRUE(mentions(p, "'dim' must be an integer"));
  EXPECT_TRUE(mentions(p, "'net.kind' expected a string"));
  EXPECT_TRUE(mentions(p, "'fit.sigma'"));
  EXPECT_TRUE(mentions(p, "'fit.acc_samples'"));
  EXPECT_TRUE(mentions(p, "'fit.target'"));
  EXPECT_TRUE(mentions(p, "'optimizer.c1'"));
  EXPECT_TRUE(mentions(p, "'optimizer.method'"));
}

TEST(ExperimentConfig, RejectsBadCombinations) {
  EXPECT_TRUE(mentions(problems_of(""), "missing required key 'experiment'"));
  EXPECT_TRUE(mentions(problems_of("experiment = \"nope\"\n"), "unknown experiment 'nope'"));
  EXPECT_TRUE(mentions(problems_of("experiment = \"fit\"\n[net]\nkind = \"support\"\n"), "'net.kind'"));
  EXPECT_TRUE(mentions(problems_of("experiment = \"minkowski\"\n[net]\nkind = \"gauge\"\n"), "'net.kind'"));
  EXPECT_TRUE(mentions(problems_of("experiment = \"uat-check\"\ndim = 4\n"), "dim 2 or 3"));
  EXPECT_TRUE(mentions(problems_of("experiment = \"fit\"\ndim = 3\n[net]\nsymmetry = 3\n"), "'net.symmetry'"));
  EXPECT_TRUE(mentions(problems_of("experiment = \"poisson\"\n[poisson]\nf = \"x1 +\"\n"), "'poisson.f'"));
  EXPECT_TRUE(mentions(problems_of("experiment = \"poisson\"\n[poisson]\nf = \"x3\"\n"), "beyond dim"));
  EXPECT_TRUE(mentions(problems_of("experiment = \"torsion-gradient\"\n[torsion]\nx_star = [0, 0]\n"),
                       "'torsion.x_star'"));
  EXPECT_TRUE(mentions(problems_of("experiment = \"pde-check\"\n[pde_check]\nbody = \"ellipsoid:1\"\n"),
                       "'pde_check.body'"));
  EXPECT_TRUE(mentions(problems_of("experiment = \"fit-stats\"\n[stats]\nvary = \"n_samples\"\nvalues = [0.5]\n"),
                       "'stats.values'"));
}

TEST(PoissonPresets, NegativeInsidePositiveFarAway) {
  for (const char* name : {"preset1", "preset2"}) {
    const Expression f(poisson_source_text(name));
    EXPECT_LT(f(Vec<double>(Eigen::Vector2d(0, 0))), 0.0) << name;
    EXPECT_GT(f(Vec<double>(Eigen::Vector2d(3, 0))), 0.0) << name;
    EXPECT_GT(f(Vec<double>(Eigen::Vector2d(0, -3))), 0.0) << name;
  }
  EXPECT_EQ(poisson_source_text("x1*x2"), "x1*x2");
}

TEST(ReadGroup, ParsesMatricesAndRejectsBadInput) {
  std::istringstream in("1 0\n0 1\n\n0 -1\n1 0\n\n-1 0\n0 -1\n\n0 1\n-1 0\n");
  const auto g = read_group(in, 2);
  EXPECT_EQ(g.order(), 4u);
  std::istringstream short_in("1 0 0\n");
  EXPECT_THROW(read_group(short_in, 2), std::invalid_argument);
  std::istringstream junk("1 0\n0 x\n");
  EXPECT_THROW(read_group(junk, 2), std::invalid_argument);
}

TEST(ExportShape, UnitBallPolylineAndMesh) {
  const auto net2 = unit_ball_net(2, 5);
  const auto csv = export_shape(net2, BodyKind::Gauge, "csv", 256);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y");
  int n = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const double x = std::stod(line.substr(0, comma)), y = std::stod(line.substr(comma + 1));
    EXPECT_NEAR(std::hypot(x, y), 1.0, 1e-10);
    ++n;
  }
  EXPECT_EQ(n, 256);
  EXPECT_EQ(export_shape(net2, BodyKind::Gauge, "csv", 256), csv);
  EXPECT_NE(export_shape(net2, BodyKind::Support, "svg", 64).find("<svg"), std::string::npos);

  const auto net3 = unit_ball_net(3, 7);
  const auto obj = export_shape(net3, BodyKind::Gauge, "obj", 24);
  int vertices = 0, faces = 0;
  std::istringstream oin(obj);
  while (std::getline(oin, line)) {
    vertices += line.rfind("v ", 0) == 0;
    faces += line.rfind("f ", 0) == 0;
  }
  EXPECT_EQ(vertices, 12 * 24);
  EXPECT_GT(faces, 0);
  EXPECT_EQ(export_shape(net3, BodyKind::Gauge, "obj", 24), obj);

  EXPECT_THROW(export_shape(net2, BodyKind::Gauge, "obj", 64), UnsupportedError);
  EXPECT_THROW(export_shape(net3, BodyKind::Gauge, "csv", 64), UnsupportedError);
}

TEST(RunExperiment, FitIsDeterministicAndWritesLayout) {
  const auto cfg = parse(kSmallFit);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  ASSERT_TRUE(a.ok) << a.error;
  ASSERT_TRUE(a.net.has_value());
  EXPECT_LT(a.metrics.get("loss"), 60.0);
  EXPECT_EQ(a.metrics.entries().back().first, "runtime");
  const auto da = scratch("fit_a"), db = scratch("fit_b");
  write_outputs(cfg, a, da);
  write_outputs(cfg, b, db);
  for (const char* f : {"config.resolved", "runlog.csv", "net.txt", "shape.csv", "shape.svg"}) {
    ASSERT_TRUE(fs::exists(da / f)) << f;
    EXPECT_EQ(slurp(da / f), slurp(db / f)) << f;
  }
  EXPECT_EQ(without_runtime(slurp(da / "metrics.txt")), without_runtime(slurp(db / "metrics.txt")));
  // The resolved config reproduces the run.
  const auto again = run_experiment(parse(slurp(da / "config.resolved")));
  std::ostringstream la, lc;
  a.log.write_csv(la);
  again.log.write_csv(lc);
  EXPECT_EQ(la.str(), lc.str());
  // The saved net reloads to the same shape export.
  const auto net = load_net((da / "net.txt").string());
  EXPECT_EQ(export_shape(net, BodyKind::Gauge, "csv", cfg.output.resolution), slurp(da / "shape.csv"));
  fs::remove_all(da);
  fs::remove_all(db);
}

TEST(RunExperiment, UatCheckMetrics) {
  const auto cfg = parse("experiment = \"uat-check\"\ndim = 2\n[uat]\npolytope = \"simplex\"\nsamples = 2000\n");
  const auto out = run_experiment(cfg);
  EXPECT_EQ(out.metrics.get("bound_holds"), 1.0);
  EXPECT_EQ(out.metrics.get("hausdorff_decreasing"), 1.0);
  EXPECT_EQ(out.metrics.get("beta[2]"), 1e-3);
  ASSERT_EQ(out.files.size(), 1u);
  EXPECT_EQ(out.files[0].first, "uat.csv");
}

TEST(RunExperiment, PdeCheckDisk) {
  const auto cfg = parse("experiment = \"pde-check\"\n[pde_check]\nsolver = \"mfs\"\n");
  const auto out = run_experiment(cfg);
  EXPECT_NEAR(out.metrics.get("T_exact"), std::numbers::pi / 8, 1e-15);
  EXPECT_LT(out.metrics.get("T_mfs_error"), 1e-4);
  EXPECT_LT(out.metrics.get("normal_derivative_mfs_error"), 1e-4);
  EXPECT_FALSE(out.metrics.has("T_galerkin"));
}

TEST(RunExperiment, FitStatsThreadsMatchSerial) {
  const std::string text = std::string(kSmallFit) +
                           "[stats]\nrepeats = 4\nvalues = [0, 0.05]\n";
  auto cfg = parse(std::string(text).replace(text.find("\"fit\""), 5, "\"fit-stats\""));
  const auto serial = run_experiment(cfg);
  cfg.threads = 3;
  const auto threaded = run_experiment(cfg);
  for (const auto& [k, v] : serial.metrics.entries())
    if (k != "runtime") {
      EXPECT_EQ(threaded.metrics.get(k), v) << k;
    }
  EXPECT_EQ(serial.metrics.get("failures[0]"), 0.0);
}
