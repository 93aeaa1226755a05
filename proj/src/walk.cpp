#include "catbrw/walk.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "catbrw/errors.h"
#include "catbrw/parallel.h"

namespace catbrw {

namespace {

// Checks that the integer vectors generate Z^d by reducing them to echelon form
// with Euclid steps and requiring unit pivots in every column.
bool generates_lattice(std::vector<std::vector<long long>> rows, int d) {
  std::size_t top = 0;
  for (int c = 0; c < d; ++c) {
    for (;;) {
      std::size_t best = rows.size();
      for (std::size_t r = top; r < rows.size(); ++r)
        if (rows[r][c] != 0 && (best == rows.size() || std::llabs(rows[r][c]) < std::llabs(rows[best][c]))) best = r;
      if (best == rows.size()) return false;
      std::swap(rows[top], rows[best]);
      bool clean = true;
      for (std::size_t r = top + 1; r < rows.size(); ++r) {
        if (rows[r][c] == 0) continue;
        const long long q = rows[r][c] / rows[top][c];
        for (int k = 0; k < d; ++k) rows[r][k] -= q * rows[top][k];
        if (rows[r][c] != 0) clean = false;
      }
      if (clean) break;
    }
    if (std::llabs(rows[top][c]) != 1) return false;
    ++top;
  }
  return true;
}

}  // namespace

WalkSpec::WalkSpec(int dimension, std::vector<Jump> jumps) : d_(dimension) {
  if (d_ < 1 || d_ > kMaxDimension) throw InputError("walk dimension must be in [1, 8]");
  for (auto& j : jumps) {
    if (static_cast<int>(j.x.size()) != d_) throw InputError("jump vector has wrong dimension");
    if (!(j.rate >= 0.0) || !std::isfinite(j.rate)) throw InputError("jump rates must be finite and nonnegative");
    if (std::all_of(j.x.begin(), j.x.end(), [](int v) { return v == 0; })) throw InputError("zero jump vector");
    if (j.rate > 0.0) jumps_.push_back(std::move(j));
  }
  if (jumps_.empty()) throw InputError("walk has no jumps");
  std::sort(jumps_.begin(), jumps_.end(), [](const Jump& l, const Jump& r) { return l.x < r.x; });
  for (std::size_t i = 1; i < jumps_.size(); ++i)
    if (jumps_[i].x == jumps_[i - 1].x) throw InputError("duplicate jump vector");

  separable_ = true;
  std::vector<std::vector<long long>> rows;
  for (const auto& j : jumps_) {
    std::vector<int> neg(j.x);
    for (auto& v : neg) v = -v;
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), neg, [](const Jump& l, const std::vector<int>& x) { return l.x < x; });
    if (it == jumps_.end() || it->x != neg || std::abs(it->rate - j.rate) > 1e-12 * j.rate)
      throw InputError("walk rates are not symmetric");
    a_ += j.rate;
    double norm2 = 0.0;
    int nonzero = 0;
    for (int v : j.x) {
      norm2 += static_cast<double>(v) * v;
      nonzero += v != 0;
    }
    b2_ += norm2 * j.rate;
    separable_ = separable_ && nonzero == 1;
    rows.emplace_back(j.x.begin(), j.x.end());
  }
  if (!generates_lattice(std::move(rows), d_)) throw InputError("walk is not irreducible on Z^d");
}

WalkSpec WalkSpec::simple(int dimension, double total_rate) {
  if (!(total_rate > 0.0)) throw InputError("total rate must be positive");
  std::vector<Jump> jumps;
  for (int i = 0; i < dimension; ++i)
    for (int s : {-1, 1}) {
      std::vector<int> x(static_cast<std::size_t>(std::max(dimension, 0)), 0);
      x[static_cast<std::size_t>(i)] = s;
      jumps.push_back({x, total_rate / (2.0 * dimension)});
    }
  return WalkSpec(dimension, std::move(jumps));
}

std::vector<double> WalkSpec::first_step_law() const {
  std::vector<double> pi;
  pi.reserve(jumps_.size());
  for (const auto& j : jumps_) pi.push_back(j.rate / a_);
  return pi;
}

std::vector<double> WalkSpec::covariance() const {
  std::vector<double> m(static_cast<std::size_t>(d_ * d_), 0.0);
  for (const auto& j : jumps_)
    for (int r = 0; r < d_; ++r)
      for (int c = 0; c < d_; ++c) m[static_cast<std::size_t>(r * d_ + c)] += j.rate * j.x[r] * j.x[c];
  return m;
}

double characteristic_exponent(const WalkSpec& spec, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != spec.dimension()) throw InputError("theta has wrong dimension");
  double s = 0.0;
  for (const auto& j : spec.jumps()) {
    double dot = 0.0;
    for (int i = 0; i < spec.dimension(); ++i) dot += theta[i] * j.x[i];
    s += j.rate * (std::cos(dot) - 1.0);
  }
  return s;
}

namespace {

// Periodic trapezoid with n nodes per axis; equals P(X_t in n Z^d).
double torus_separable(const WalkSpec& spec, double t, int n) {
  const int d = spec.dimension();
  double prod = 1.0;
  for (int axis = 0; axis < d; ++axis) {
    std::vector<std::pair<int, double>> terms;
    for (const auto& j : spec.jumps())
      if (j.x[axis] != 0) terms.emplace_back(j.x[axis], j.rate);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * std::numbers::pi * k / n;
      double e = 0.0;
      for (const auto& [x, r] : terms) e += r * (std::cos(th * x) - 1.0);
      sum += std::exp(t * e);
    }
    prod *= sum / n;
  }
  return prod;
}

double torus_tensor(const WalkSpec& spec, double t, int n) {
  const int d = spec.dimension();
  std::vector<double> cos_table(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) cos_table[m] = std::cos(2.0 * std::numbers::pi * m / n);
  const auto& jumps = spec.jumps();
  std::vector<long long> phase(jumps.size(), 0);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  long long total = 1;
  for (int i = 0; i < d; ++i) total *= n;
  double sum = 0.0;
  for (long long p = 0; p < total; ++p) {
    double e = 0.0;
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      long long ph = 0;
      for (int i = 0; i < d; ++i) ph += static_cast<long long>(idx[i]) * jumps[k].x[i];
      ph %= n;
      if (ph < 0) ph += n;
      e += jumps[k].rate * (cos_table[static_cast<std::size_t>(ph)] - 1.0);
    }
    sum += std::exp(t * e);
    for (int i = 0; i < d; ++i) {
      if (++idx[i] < n) break;
      idx[i] = 0;
    }
  }
  return sum / static_cast<double>(total);
}

}  // namespace

double transition_probability_origin(const WalkSpec& spec, double t, const QuadratureOptions& opts) {
  if (!(t >= 0.0)) throw InputError("time must be nonnegative");
  if (t == 0.0) return 1.0;
  if (opts.nodes < 2 || opts.nodes % 2 != 0) throw InputError("quadrature node count must be even and >= 2");
  const bool sep = spec.axis_separable();
  auto eval = [&](int n) { return sep ? torus_separable(spec, t, n) : torus_tensor(spec, t, n); };
  auto affordable = [&](int n) {
    if (sep) return n <= opts.max_nodes_separable;
    long double pts = 1.0L;
    for (int i = 0; i < spec.dimension(); ++i) pts *= n;
    return pts <= static_cast<long double>(opts.max_points_tensor);
  };
  int n = opts.nodes;
  if (!affordable(n)) throw QuadratureResolutionError("configured node count exceeds the quadrature budget");
  double coarse = eval(n / 2);
  for (;;) {
    const double fine = eval(n);
    if (std::abs(coarse - fine) <= opts.rel_tol * fine) return fine;
    if (!affordable(2 * n))
      throw QuadratureResolutionError("p(t;0) at t=" + std::to_string(t) + " not resolved with " + std::to_string(n) +
                                      " nodes per axis; refine the grid or lower the tolerance");
    coarse = fine;
    n *= 2;
  }
}

GammaEstimate gamma_d(const WalkSpec& spec, const GammaOptions& opts) {
  GammaEstimate g;
  const double half_d = 0.5 * spec.dimension();
  double t = opts.t0;
  for (int k = 0; k < opts.rungs; ++k, t *= 2.0) {
    g.ladder_t.push_back(t);
    g.ladder_values.push_back(std::pow(t, half_d) * transition_probability_origin(spec, t, opts.quadrature));
    if (k == 0) continue;
    const double v1 = g.ladder_values[k];
    const double v0 = g.ladder_values[k - 1];
    if (std::abs(v1 - v0) < opts.convergence * v1) {
      // Leading correction is O(1/t): eliminate it between the last two rungs.
      g.value = 2.0 * v1 - v0;
      g.error = std::abs(v1 - v0);
      return g;
    }
  }
  throw NonConvergenceError("gamma ladder did not settle to " + std::to_string(opts.convergence) + " by t=" +
                            std::to_string(g.ladder_t.back()));
}

double gamma_gaussian(const WalkSpec& spec) {
  const int d = spec.dimension();
  std::vector<double> m = spec.covariance();
  double det = 1.0;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(m[r * d + c]) > std::abs(m[piv * d + c])) piv = r;
    if (piv != c) {
      for (int k = 0; k < d; ++k) std::swap(m[c * d + k], m[piv * d + k]);
      det = -det;
    }
    det *= m[c * d + c];
    for (int r = c + 1; r < d; ++r) {
      const double f = m[r * d + c] / m[c * d + c];
      for (int k = c; k < d; ++k) m[r * d + k] -= f * m[c * d + k];
    }
  }
  return std::pow(2.0 * std::numbers::pi, -0.5 * d) / std::sqrt(det);
}

ExcursionSampler::ExcursionSampler(const WalkSpec& spec)
    : d_(spec.dimension()), a_(spec.total_rate()) {
  const auto pi = spec.first_step_law();
  direction_ = boost::random::discrete_distribution<std::uint32_t, double>(pi.begin(), pi.end());
  for (const auto& j : spec.jumps())
    for (int v : j.x) steps_.push_back(v);
}

ExcursionOutcome ExcursionSampler::operator()(double horizon, RngStream& rng) const {
  std::int32_t pos[WalkSpec::kMaxDimension] = {};
  const std::int32_t* step = steps_.data() + static_cast<std::size_t>(direction_(rng)) * d_;
  int off_axes = 0;
  for (int i = 0; i < d_; ++i) {
    pos[i] = step[i];
    off_axes += pos[i] != 0;
  }
  // Elapsed time is -log(prod u)/a; track the product and compare it with
  // exp(-a H) instead of taking a log per step.
  const double log_floor = -a_ * horizon;
  double log_acc = 0.0;
  double prod = 1.0;
  double threshold = std::exp(std::max(log_floor, -800.0));
  for (;;) {
    prod *= rng.uniform_pos();
    if (prod < threshold) return {false, horizon};
    if (prod < 1e-200) {
      log_acc += std::log(prod);
      prod = 1.0;
      if (log_acc < log_floor) return {false, horizon};
      threshold = std::exp(std::max(log_floor - log_acc, -800.0));
    }
    step = steps_.data() + static_cast<std::size_t>(direction_(rng)) * d_;
    for (int i = 0; i < d_; ++i) {
      const std::int32_t before = pos[i];
      pos[i] += step[i];
      off_axes += (pos[i] != 0) - (before != 0);
    }
    if (off_axes == 0) return {true, -(log_acc + std::log(prod)) / a_};
  }
}

ExcursionOutcome sample_excursion(const WalkSpec& spec, double horizon, RngStream& rng) {
  if (!(horizon > 0.0)) throw InputError("excursion horizon must be positive");
  return ExcursionSampler(spec)(horizon, rng);
}

McEstimate estimate_escape_probability(const WalkSpec& spec, std::int64_t replicates, double horizon,
                                       std::uint64_t seed, int threads) {
  if (spec.dimension() <= 2) throw UnsupportedDimensionError("escape probability requires a transient walk (d >= 3)");
  if (replicates < 1) throw InputError("replicates must be positive");
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  const ExcursionSampler sampler(spec);
  const std::int64_t escaped = run_chunked(
      replicates, threads, [] { return std::int64_t{0}; },
      [&](std::int64_t& count, std::int64_t begin, std::int64_t end) {
        for (std::int64_t r = begin; r < end; ++r) {
          RngStream rng(seed, StreamTag::Excursion, static_cast<std::uint64_t>(r));
          count += !sampler(horizon, rng).returned;
        }
      },
      [](std::int64_t& acc, const std::int64_t& part) { acc += part; });
  McEstimate est;
  est.replicates = replicates;
  est.seed = seed;
  est.value = static_cast<double>(escaped) / static_cast<double>(replicates);
  est.std_error = replicates > 1 ? std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(replicates)) : 0.0;
  return est;
}

double censor_corrected_escape(double h_raw, double total_rate, double gamma, int dimension, double horizon) {
  const double c = 2.0 * total_rate * gamma / ((dimension - 2) * std::pow(horizon, 0.5 * dimension - 1.0));
  if (c <= 0.0) return h_raw;
  return 2.0 * h_raw / (1.0 + std::sqrt(1.0 + 4.0 * c * h_raw));
}

ReturnTable tabulate_return_cdf(const WalkSpec& spec, std::span<const double> grid, std::int64_t replicates,
                                double horizon, std::uint64_t seed, const ReturnTableOptions& opts) {
  const int d = spec.dimension();
  if (d <= 2) throw UnsupportedDimensionError("return-time tabulation requires d >= 3");
  if (grid.size() < 2 || grid.front() != 0.0) throw InputError("return grid must start at 0 with >= 2 nodes");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InputError("return grid must be strictly increasing");
  if (grid.back() > horizon) throw InputError("return grid extends past the horizon");
  if (replicates < 1) throw InputError("replicates must be positive");

  ReturnTable out;
  out.gamma = opts.gamma > 0.0 ? opts.gamma : gamma_d(spec).value;
  out.horizon = horizon;
  out.replicates = replicates;
  out.seed = seed;

  const std::size_t cells = grid.size() - 1;
  struct Tally {
    std::int64_t escaped = 0;
    std::vector<std::int64_t> hist;
  };
  const ExcursionSampler sampler(spec);
  Tally tally = run_chunked(
      replicates, opts.threads, [&] { return Tally{0, std::vector<std::int64_t>(cells, 0)}; },
      [&](Tally& t, std::int64_t begin, std::int64_t end) {
        for (std::int64_t r = begin; r < end; ++r) {
          RngStream rng(seed, StreamTag::Excursion, static_cast<std::uint64_t>(r));
          const ExcursionOutcome o = sampler(horizon, rng);
          if (!o.returned) {
            ++t.escaped;
          } else if (o.time <= grid.back()) {
            auto it = std::upper_bound(grid.begin(), grid.end(), o.time);
            const auto cell = std::min<std::size_t>(static_cast<std::size_t>(it - grid.begin()) - 1, cells - 1);
            ++t.hist[cell];
          }
        }
      },
      [](Tally& acc, const Tally& part) {
        acc.escaped += part.escaped;
        for (std::size_t i = 0; i < acc.hist.size(); ++i) acc.hist[i] += part.hist[i];
      });

  const auto n = static_cast<double>(replicates);
  out.h_raw = static_cast<double>(tally.escaped) / n;
  out.h_raw_se = std::sqrt(out.h_raw * (1.0 - out.h_raw) / n);
  out.h = censor_corrected_escape(out.h_raw, spec.total_rate(), out.gamma, d, horizon);
  if (!(out.h > 0.0 && out.h < 1.0)) throw CalibrationError("escape estimate is degenerate; increase replicates");

  for (std::size_t i = 0; i < cells; ++i)
    if (static_cast<std::size_t>(tally.hist[i]) < opts.min_count)
      throw TabulationQualityError("return cell [" + std::to_string(grid[i]) + ", " + std::to_string(grid[i + 1]) +
                                   ") holds " + std::to_string(tally.hist[i]) + " samples (minimum " +
                                   std::to_string(opts.min_count) + ")");

  std::vector<double> cdf(grid.size(), 0.0);
  std::int64_t cum = 0;
  const double norm = n * (1.0 - out.h);
  for (std::size_t i = 0; i < cells; ++i) {
    cum += tally.hist[i];
    cdf[i + 1] = std::min(1.0, static_cast<double>(cum) / norm);
  }
  const double splice = grid.back();
  PowerTail tail;
  tail.exponent = 0.5 * d - 1.0;
  tail.constant = (1.0 - cdf.back()) * std::pow(splice, tail.exponent);
  tail.splice = splice;
  out.g2 = TabulatedDistribution(std::vector<double>(grid.begin(), grid.end()), std::move(cdf), 1.0, std::nullopt, tail);
  out.tail_constant_theory = 2.0 * spec.total_rate() * out.gamma * out.h * out.h / ((1.0 - out.h) * (d - 2));
  return out;
}

}  // namespace catbrw
