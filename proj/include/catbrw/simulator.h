#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "catbrw/distribution.h"
#include "catbrw/offspring.h"
#include "catbrw/walk.h"

namespace catbrw {

enum class ExcursionMode { Spatial, Tabulated };

struct SimConfig {
  double window = 1000.0;
  std::int64_t replicates = 100000;
  std::uint64_t seed = 1;
  std::vector<double> probes;
  ExcursionMode mode = ExcursionMode::Tabulated;
  double alpha = 1.0;
  OffspringLaw offspring = OffspringLaw({0.0, 1.0});
  std::optional<WalkSpec> walk;              // Spatial mode
  std::optional<TabulatedDistribution> g2;   // Tabulated mode
  double h = 0.0;                            // escape probability used by Tabulated mode
  std::int64_t explosion_cap = 1000000;
  bool enforce_criticality = true;
  double criticality_tol = 1e-4;
  int threads = 1;
};

void validate(const SimConfig& cfg);

struct OriginOccupancy {
  std::vector<std::pair<double, double>> intervals;  // [arrival, departure), capped at the window
  bool exploded = false;
};

OriginOccupancy simulate_replicate(const SimConfig& cfg, std::int64_t replicate_index);

struct ProbeTally {
  std::int64_t survivors = 0;
  std::int64_t sum = 0;
  __int128 sum_sq = 0;
  __int128 sum_fact2 = 0;
  __int128 sum_fact2_sq = 0;
  std::map<std::int64_t, std::int64_t> histogram;  // mu -> count, mu > 0

  void add(std::int64_t mu);
  void merge(const ProbeTally& other);
};

struct SimulationResult {
  std::vector<double> probes;
  std::vector<ProbeTally> tallies;
  std::int64_t replicates = 0;  // completed, i.e. excluding exploded ones
  std::int64_t exploded = 0;
  std::uint64_t seed = 0;

  McEstimate survival(std::size_t i) const;
  McEstimate mean(std::size_t i) const;
  McEstimate factorial2(std::size_t i) const;
};

SimulationResult run_simulation(const SimConfig& cfg);
std::vector<McEstimate> estimate_survival(const SimConfig& cfg);

struct ConditionalLaw {
  double t = 0.0;
  std::int64_t survivors = 0;
  double conditional_mean = 0.0;
  std::vector<std::pair<std::int64_t, std::int64_t>> histogram;
  double ks_distance = 0.0;
};

// Sup over x >= x_min of |F(x) - yaglom_cdf(x)|, F the law of mu/E[mu | mu > 0]
// among survivors. With x_min = 0 this is the plain Kolmogorov-Smirnov distance;
// it stays above 1/3 because survivors never charge (0, 1/mean).
double yaglom_ks_distance(const std::vector<std::pair<std::int64_t, std::int64_t>>& histogram, double x_min = 0.0);

ConditionalLaw conditional_law(const SimulationResult& res, std::size_t probe, std::int64_t min_survivors = 500);
ConditionalLaw conditional_law(const SimConfig& cfg, double t, std::int64_t min_survivors = 500);

}  // namespace catbrw
