#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <boost/random/discrete_distribution.hpp>

#include "catbrw/distribution.h"
#include "catbrw/rng.h"

namespace catbrw {

struct Jump {
  std::vector<int> x;
  double rate = 0.0;
};

// Symmetric continuous-time random walk on Z^d with finitely many jump vectors.
class WalkSpec {
 public:
  static constexpr int kMaxDimension = 8;

  WalkSpec(int dimension, std::vector<Jump> jumps);
  // a/(2d) on each of the 2d unit vectors.
  static WalkSpec simple(int dimension, double total_rate);

  int dimension() const noexcept { return d_; }
  const std::vector<Jump>& jumps() const noexcept { return jumps_; }
  double total_rate() const noexcept { return a_; }
  double second_moment() const noexcept { return b2_; }
  std::vector<double> first_step_law() const;
  // Every jump vector lies on a coordinate axis.
  bool axis_separable() const noexcept { return separable_; }
  // Covariance matrix M_ij = sum a(x) x_i x_j, row-major.
  std::vector<double> covariance() const;

 private:
  int d_;
  std::vector<Jump> jumps_;
  double a_ = 0.0;
  double b2_ = 0.0;
  bool separable_ = false;
};

double characteristic_exponent(const WalkSpec& spec, std::span<const double> theta);

struct QuadratureOptions {
  int nodes = 64;
  double rel_tol = 1e-12;
  int max_nodes_separable = 1 << 16;
  long long max_points_tensor = 1LL << 24;
};

// Periodic trapezoid on the torus with node doubling until two consecutive
// resolutions agree to rel_tol.
double transition_probability_origin(const WalkSpec& spec, double t, const QuadratureOptions& opts = {});

struct GammaEstimate {
  double value = 0.0;
  double error = 0.0;
  std::vector<double> ladder_t;
  std::vector<double> ladder_values;
};

struct GammaOptions {
  double t0 = 100.0;
  int rungs = 7;
  double convergence = 5e-3;
  QuadratureOptions quadrature{};
};

GammaEstimate gamma_d(const WalkSpec& spec, const GammaOptions& opts = {});
// Local-limit constant (2 pi)^(-d/2) det(M)^(-1/2).
double gamma_gaussian(const WalkSpec& spec);

struct ExcursionOutcome {
  bool returned = false;
  double time = 0.0;  // duration if returned, else the horizon
};

// Samples one excursion: first step from pi at time 0, Exp(a) holding at
// every non-origin site, stop at the origin or when the horizon is passed.
class ExcursionSampler {
 public:
  explicit ExcursionSampler(const WalkSpec& spec);
  ExcursionOutcome operator()(double horizon, RngStream& rng) const;

 private:
  int d_;
  double a_;
  std::vector<std::int32_t> steps_;  // flattened jump vectors
  boost::random::discrete_distribution<std::uint32_t, double> direction_;
};

ExcursionOutcome sample_excursion(const WalkSpec& spec, double horizon, RngStream& rng);

McEstimate estimate_escape_probability(const WalkSpec& spec, std::int64_t replicates, double horizon,
                                       std::uint64_t seed, int threads = 1);

struct ReturnTableOptions {
  std::size_t min_count = 5;
  int threads = 1;
  // Reuse a precomputed constant instead of running the gamma ladder.
  double gamma = 0.0;
};

struct ReturnTable {
  TabulatedDistribution g2;
  double h_raw = 0.0;        // fraction not returned by the horizon
  double h_raw_se = 0.0;
  double h = 0.0;            // censoring-corrected escape probability
  double gamma = 0.0;
  double horizon = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  double tail_constant_theory = 0.0;  // 2 a gamma h^2 / ((1-h)(d-2))
};

// Escape fraction at horizon H equals h + c h^2 with c = 2 a gamma / ((d-2) H^(d/2-1));
// invert for h.
double censor_corrected_escape(double h_raw, double total_rate, double gamma, int dimension, double horizon);

ReturnTable tabulate_return_cdf(const WalkSpec& spec, std::span<const double> grid, std::int64_t replicates,
                                double horizon, std::uint64_t seed, const ReturnTableOptions& opts = {});

}  // namespace catbrw
