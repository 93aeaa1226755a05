#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace catbrw {

// 1 - F(t) = constant * t^(-exponent) for t beyond the splice point.
struct PowerTail {
  double constant = 0.0;
  double exponent = 0.0;
  double splice = 0.0;
};

// A (possibly defective) CDF sampled on a strictly increasing grid starting at 0,
// linearly interpolated between nodes.
class TabulatedDistribution {
 public:
  TabulatedDistribution() = default;
  TabulatedDistribution(std::vector<double> grid, std::vector<double> cdf, double total_mass,
                        std::optional<std::vector<double>> density = std::nullopt,
                        std::optional<PowerTail> tail = std::nullopt);

  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<double>& cdf() const noexcept { return cdf_; }
  const std::optional<std::vector<double>>& density() const noexcept { return density_; }
  const std::optional<PowerTail>& tail() const noexcept { return tail_; }
  double total_mass() const noexcept { return total_mass_; }
  double grid_max() const noexcept { return grid_.back(); }

  // True when value() is defined at t (inside the grid or covered by the tail patch).
  bool covers(double t) const noexcept;
  // Throws GridCoverageError when t lies beyond the grid and no patch is attached.
  double value(double t) const;
  // Smallest t with value(t) >= u, for u in [0, total_mass). Linear inside cells,
  // analytic in the tail patch.
  double quantile(double u) const;

  static TabulatedDistribution unit_step(double t_max);
  static TabulatedDistribution exponential(std::span<const double> grid, double rate, double mass = 1.0);

 private:
  std::vector<double> grid_;
  std::vector<double> cdf_;
  std::optional<std::vector<double>> density_;
  std::optional<PowerTail> tail_;
  double total_mass_ = 1.0;
};

struct SolutionTable {
  std::string label;
  std::vector<double> grid;
  std::vector<double> values;
  std::map<std::string, double> params;

  double at(double t) const;
  std::size_t size() const noexcept { return grid.size(); }
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
};

std::vector<double> uniform_grid(double step, double t_max);
std::vector<double> geometric_grid(double first, double ratio, double splice);

}  // namespace catbrw
