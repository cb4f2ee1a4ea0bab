// Command-line front end: run and validate experiment configs, export saved nets.
//
// Exit status: 0 success, 1 runtime or numerical failure, 2 usage or config error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "convexnet/errors.hpp"
#include "convexnet/experiments.hpp"

namespace {

constexpr int kFailure = 1;
constexpr int kUsage = 2;

int report(const convexnet::ConfigError& e) {
  std::cerr << "config error:\n";
  for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace convexnet;
  CLI::App app{"Convex shape optimization with sublinear networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
  run->add_flag("-q,--quiet", quiet, "No progress output");

  auto* validate = app.add_subcommand("validate", "Check a config file and print it resolved");
  validate->add_option("config", config_path, "Config file")->required();

  std::string net_path, format, kind = "gauge", out_file;
  int resolution = 0;
  auto* exp = app.add_subcommand("export", "Export the boundary of a saved net");
  exp->add_option("net", net_path, "Net file (net.txt)")->required();
  exp->add_option("format", format, "csv or svg (2D), obj (3D)")->required();
  exp->add_option("--kind", kind, "gauge or support")->check(CLI::IsMember({"gauge", "support"}));
  exp->add_option("--resolution", resolution, "Boundary points (2D) or longitudes (3D)")
      ->check(CLI::Range(8, 1 << 16));
  exp->add_option("-o,--output", out_file, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*validate || *run) {
    ExperimentConfig cfg;
    try {
      cfg = load_experiment_config(config_path);
    } catch (const ConfigError& e) {
      return report(e);
    }
    if (*validate) {
      std::cout << resolved_config_text(cfg);
      return 0;
    }
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    try {
      const auto outcome = run_experiment(cfg, quiet ? nullptr : &std::cerr);
      write_outputs(cfg, outcome, cfg.output.dir);
      std::cout << outcome.metrics.to_text();
      if (!outcome.ok) {
        std::cerr << "error: " << outcome.error << "\n";
        return kFailure;
      }
      return 0;
    } catch (const ConfigError& e) {
      return report(e);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kFailure;
    }
  }

  try {
    const SymmetrizedNet net = load_net(net_path);
    const int d = net.base.dim;
    if (resolution == 0) resolution = d == 2 ? 256 : 64;
    const std::string text =
        export_shape(net, kind == "support" ? BodyKind::Support : BodyKind::Gauge, format, resolution);
    if (out_file.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(out_file, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + out_file);
      f << text;
    }
    return 0;
  } catch (const UnsupportedError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
