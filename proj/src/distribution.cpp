#include "catbrw/distribution.h"

#include <algorithm>
#include <cmath>

#include "catbrw/errors.h"

namespace catbrw {

namespace {

std::size_t cell_of(const std::vector<double>& grid, double t) {
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  return i == 0 ? 0 : std::min(i - 1, grid.size() - 2);
}

}  // namespace

TabulatedDistribution::TabulatedDistribution(std::vector<double> grid, std::vector<double> cdf, double total_mass,
                                             std::optional<std::vector<double>> density,
                                             std::optional<PowerTail> tail)
    : grid_(std::move(grid)),
      cdf_(std::move(cdf)),
      density_(std::move(density)),
      tail_(tail),
      total_mass_(total_mass) {
  if (grid_.size() < 2 || grid_.size() != cdf_.size()) throw InputError("tabulated distribution needs >= 2 matching nodes");
  if (grid_.front() != 0.0) throw InputError("tabulated distribution grid must start at 0");
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (!(grid_[i] > grid_[i - 1])) throw InputError("tabulated distribution grid must be strictly increasing");
    if (cdf_[i] < cdf_[i - 1]) throw InputError("tabulated cdf must be nondecreasing");
  }
  if (cdf_.front() < 0.0 || cdf_.back() > total_mass_ + 1e-12) throw InputError("tabulated cdf outside [0, total_mass]");
  if (density_ && density_->size() != grid_.size()) throw InputError("density length mismatch");
}

bool TabulatedDistribution::covers(double t) const noexcept { return t <= grid_.back() || tail_.has_value(); }

double TabulatedDistribution::value(double t) const {
  if (t < 0.0) return 0.0;
  if (t >= grid_.back()) {
    if (t == grid_.back()) return cdf_.back();
    if (!tail_) throw GridCoverageError("evaluation at t=" + std::to_string(t) + " beyond grid without tail patch");
    return total_mass_ - tail_->constant * std::pow(t, -tail_->exponent);
  }
  const std::size_t i = cell_of(grid_, t);
  const double w = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return cdf_[i] + w * (cdf_[i + 1] - cdf_[i]);
}

double TabulatedDistribution::quantile(double u) const {
  if (u <= cdf_.front()) return 0.0;
  if (u > cdf_.back()) {
    if (!tail_) throw GridCoverageError("quantile beyond tabulated mass without tail patch");
    return std::pow(tail_->constant / (total_mass_ - u), 1.0 / tail_->exponent);
  }
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t j = static_cast<std::size_t>(it - cdf_.begin());
  const double lo = cdf_[j - 1];
  const double hi = cdf_[j];
  return grid_[j - 1] + (u - lo) / (hi - lo) * (grid_[j] - grid_[j - 1]);
}

TabulatedDistribution TabulatedDistribution::unit_step(double t_max) {
  return TabulatedDistribution({0.0, t_max}, {1.0, 1.0}, 1.0, std::vector<double>{0.0, 0.0});
}

TabulatedDistribution TabulatedDistribution::exponential(std::span<const double> grid, double rate, double mass) {
  std::vector<double> g(grid.begin(), grid.end());
  std::vector<double> cdf(g.size());
  std::vector<double> dens(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    cdf[i] = -mass * std::expm1(-rate * g[i]);
    dens[i] = mass * rate * std::exp(-rate * g[i]);
  }
  return TabulatedDistribution(std::move(g), std::move(cdf), mass, std::move(dens));
}

double SolutionTable::at(double t) const {
  if (grid.empty()) throw InputError("empty solution table");
  if (t <= grid.front()) return values.front();
  if (t >= grid.back()) {
    if (t == grid.back()) return values.back();
    throw GridCoverageError("solution table '" + label + "' does not reach t=" + std::to_string(t));
  }
  const std::size_t i = cell_of(grid, t);
  const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
  return values[i] + w * (values[i + 1] - values[i]);
}

std::vector<double> uniform_grid(double step, double t_max) {
  if (!(step > 0.0) || !(t_max > 0.0)) throw InputError("grid step and horizon must be positive");
  const auto n = static_cast<std::size_t>(std::llround(t_max / step));
  if (std::abs(static_cast<double>(n) * step - t_max) > 1e-9 * t_max) throw InputError("grid horizon must be a multiple of the step");
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = static_cast<double>(i) * step;
  return g;
}

std::vector<double> geometric_grid(double first, double ratio, double splice) {
  if (!(first > 0.0) || !(ratio > 1.0) || !(splice > first)) throw InputError("invalid geometric grid parameters");
  std::vector<double> g{0.0};
  for (double t = first; t < splice * (1.0 - 1e-12); t *= ratio) g.push_back(t);
  if (splice - g.back() < 0.25 * (g.back() - g[g.size() - 2])) g.back() = splice;
  else g.push_back(splice);
  return g;
}

}  // namespace catbrw
