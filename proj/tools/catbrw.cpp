#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "catbrw/errors.h"
#include "catbrw/experiment.h"

namespace {

int exit_code(catbrw::ErrorKind kind) {
  switch (kind) {
    case catbrw::ErrorKind::Input:
    case catbrw::ErrorKind::Config: return 2;
    case catbrw::ErrorKind::Calibration: return 3;
    case catbrw::ErrorKind::Numerical: return 4;
    case catbrw::ErrorKind::Dependency: return 5;
  }
  return 1;
}

struct Overrides {
  std::string config;
  std::string out = "out";
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<double> grid_step;
  std::optional<long long> replicates;
};

catbrw::ExperimentConfig resolve(const Overrides& o) {
  catbrw::ExperimentConfig cfg = o.config.empty() ? catbrw::default_config() : catbrw::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.grid_step) cfg.solver.step = *o.grid_step;
  if (o.replicates) cfg.mc.replicates = *o.replicates;
  return catbrw::parse_config(cfg.to_json());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical catalytic branching random walk experiments"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON experiment config (defaults to the built-in d=4 model)");
  app.add_option("--out", o.out, "Artifact directory");
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Override the config seed");
  app.add_option("--grid-step", o.grid_step, "Override the solver step");
  app.add_option("--replicates", o.replicates, "Override the Monte Carlo replicate count");

  auto* cal = app.add_subcommand("calibrate", "Estimate walk constants, tabulate G2 and calibrate alpha");
  auto* solve = app.add_subcommand("solve", "Solve the survival equation");
  auto* moments = app.add_subcommand("moments", "Compute factorial moments P_n");
  auto* sim = app.add_subcommand("simulate", "Run the Monte Carlo simulator");
  auto* report = app.add_subcommand("report", "Join all tables and evaluate the acceptance criteria");
  app.add_subcommand("show-config", "Print the resolved config");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = resolve(o);
    std::filesystem::create_directories(o.out);
    catbrw::Pipeline pipe(cfg, o.out, o.threads);
    if (*cal) {
      std::cout << pipe.calibrate().constants.to_text();
    } else if (*solve) {
      pipe.solve();
    } else if (*moments) {
      pipe.moments();
    } else if (*sim) {
      pipe.simulate();
    } else if (*report) {
      std::cout << pipe.report();
    } else {
      std::cout << cfg.to_json().dump(2) << "\n";
    }
  } catch (const catbrw::Error& e) {
    std::fprintf(stderr, "catbrw: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "catbrw: %s\n", e.what());
    return 1;
  }
  return 0;
}
