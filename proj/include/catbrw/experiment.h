#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "catbrw/distribution.h"
#include "catbrw/io.h"
#include "catbrw/limit_laws.h"
#include "catbrw/offspring.h"
#include "catbrw/simulator.h"
#include "catbrw/walk.h"

namespace catbrw {

struct CalibrationSettings {
  std::int64_t excursions = 1000000;
  double horizon = 1000.0;
  double grid_first = 0.1;
  double grid_ratio = 1.05;
  double splice = 100.0;
  std::int64_t min_count = 5;
};

struct SolverSettings {
  double step = 0.05;
  double t_max = 2000.0;
};

struct McSettings {
  std::int64_t replicates = 1000000;
  double window = 1000.0;
  std::vector<double> probes{0.0, 10.0, 50.0, 200.0, 1000.0};
  ExcursionMode mode = ExcursionMode::Tabulated;
  std::int64_t explosion_cap = 1000000;
};

struct ExperimentConfig {
  nlohmann::json walk;
  nlohmann::json offspring;
  double epsilon = 0.1;
  CalibrationSettings calibration;
  SolverSettings solver;
  int max_moment = 3;
  McSettings mc;
  std::uint64_t seed = 20240917;

  WalkSpec make_walk() const;
  OffspringLaw make_offspring() const;
  // Canonical form; every artifact embeds it.
  nlohmann::json to_json() const;
  std::string hash() const;
};

ExperimentConfig default_config();
// Missing keys take defaults; unknown keys and ill-typed values raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Calibration {
  ModelConstants constants;
  TabulatedDistribution g2;
  double h_raw = 0.0;
};

struct McSummary {
  std::vector<double> probes;
  std::vector<McEstimate> survival;
  std::vector<McEstimate> mean;
  std::vector<McEstimate> factorial2;
  std::vector<std::int64_t> survivors;
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> histograms;
  std::int64_t exploded = 0;

  static McSummary from(const SimulationResult& r);
};

// Flat-file pipeline: each step writes '<step>-<hash12>*' artifacts into the
// output directory and records their SHA-256 in manifest.json.
class Pipeline {
 public:
  Pipeline(ExperimentConfig cfg, std::filesystem::path out, int threads = 1);

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const std::filesystem::path& out_dir() const noexcept { return out_; }

  Calibration calibrate();
  void solve();
  void moments();
  void simulate();
  // Returns the report text; writes the report and the comparison table.
  std::string report();

  Calibration load_calibration() const;
  McSummary load_simulation() const;
  // Verified bytes of a recorded artifact.
  std::string load_artifact(const std::string& step, const std::string& name) const;

  // Artifact renderers shared by the step commands and the report's
  // regeneration check.
  std::string render_solution(const Calibration& cal) const;
  std::string render_moments(const Calibration& cal) const;

 private:
  void record(const std::string& step, const std::string& name, const std::string& suffix, const std::string& bytes);
  nlohmann::json read_manifest() const;
  Metadata base_meta() const;

  ExperimentConfig cfg_;
  std::filesystem::path out_;
  int threads_;
  std::string hash_;
};

}  // namespace catbrw
