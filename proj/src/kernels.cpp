#include "catbrw/kernels.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "catbrw/errors.h"

namespace catbrw {

namespace {

using Gauss8 = boost::math::quadrature::gauss<double, 8>;

// Piecewise description of a tabulated G2: constant density inside cells,
// power-law density beyond the splice.
class ReturnLaw {
 public:
  explicit ReturnLaw(const TabulatedDistribution& g) : g_(g), grid_(g.grid()), cdf_(g.cdf()) {
    slope_.resize(grid_.size() - 1);
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) slope_[i] = (cdf_[i + 1] - cdf_[i]) / (grid_[i + 1] - grid_[i]);
    if (g.tail()) {
      tail_c_ = g.tail()->constant;
      tail_e_ = g.tail()->exponent;
    }
  }

  double splice() const noexcept { return grid_.back(); }
  double tail_density_constant() const noexcept { return tail_c_ * tail_e_; }

  double density(double s) const {
    if (s >= splice()) return tail_c_ * tail_e_ * std::pow(s, -tail_e_ - 1.0);
    return slope_[cell(s)];
  }
  double survival(double s) const { return 1.0 - g_.value(s); }

  // int_p^q e^{-(b-s)} phi(s) ds, phi = density or survival function.
  double exp_integral(double p, double q, double b, bool survival_fn) const {
    double total = 0.0;
    double lo = p;
    while (lo < q) {
      double hi = q;
      if (lo < splice()) {
        const std::size_t c = cell(lo);
        hi = std::min(q, grid_[c + 1]);
        const double len = hi - lo;
        const double e = std::exp(-(b - hi));
        const double i0 = -e * std::expm1(-len);
        if (!survival_fn) {
          total += slope_[c] * i0;
        } else {
          const double i1 = e * (len + std::expm1(-len));
          total += survival(lo) * i0 - slope_[c] * i1;
        }
      } else {
        total += Gauss8::integrate(
            [&](double s) { return std::exp(-(b - s)) * (survival_fn ? survival(s) : density(s)); }, lo, hi);
      }
      lo = hi;
    }
    return total;
  }

  // Points of [p, q] where the density jumps.
  std::vector<double> breaks(double p, double q) const {
    std::vector<double> out{p};
    auto it = std::upper_bound(grid_.begin(), grid_.end(), p);
    for (; it != grid_.end() && *it < q; ++it) out.push_back(*it);
    out.push_back(q);
    return out;
  }

 private:
  std::size_t cell(double s) const {
    auto it = std::upper_bound(grid_.begin(), grid_.end(), s);
    const auto i = static_cast<std::size_t>(it - grid_.begin());
    return std::min(i == 0 ? 0 : i - 1, slope_.size() - 1);
  }

  const TabulatedDistribution& g_;
  const std::vector<double>& grid_;
  const std::vector<double>& cdf_;
  std::vector<double> slope_;
  double tail_c_ = 0.0;
  double tail_e_ = 0.0;
};

double density_at(const TabulatedDistribution& d, double t) {
  const auto& g = d.grid();
  const auto& v = *d.density();
  if (t >= g.back()) return v.back();
  auto it = std::upper_bound(g.begin(), g.end(), t);
  const auto i = static_cast<std::size_t>(it - g.begin()) - 1;
  const double w = (t - g[i]) / (g[i + 1] - g[i]);
  return v[i] + w * (v[i + 1] - v[i]);
}

}  // namespace

TabulatedDistribution stieltjes_convolve(const TabulatedDistribution& F, const TabulatedDistribution& G,
                                         std::span<const double> grid) {
  if (grid.size() < 2 || grid.front() != 0.0) throw InputError("convolution grid must start at 0");
  const double t_max = grid.back();
  if (!F.covers(t_max) || !G.covers(t_max))
    throw GridCoverageError("convolution inputs do not span [0, " + std::to_string(t_max) + "]");
  std::vector<double> gv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) gv[i] = G.value(grid[i]);
  std::vector<double> out(grid.size());
  double running = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double t = grid[m];
    double acc = F.value(t) * gv[0];
    double f_prev = F.value(t);
    for (std::size_t k = 0; k < m; ++k) {
      const double f_next = F.value(t - grid[k + 1]);
      acc += 0.5 * (f_prev + f_next) * (gv[k + 1] - gv[k]);
      f_prev = f_next;
    }
    running = std::max(running, acc);
    out[m] = running;
  }
  const double mass = F.total_mass() * G.total_mass();
  for (double& v : out) v = std::min(v, mass);
  return TabulatedDistribution(std::vector<double>(grid.begin(), grid.end()), std::move(out), mass);
}

std::size_t KernelSet::last_index(double t_max) const {
  if (t_max < 0.0) return grid.size() - 1;
  const auto n = static_cast<std::size_t>(std::floor(t_max / step + 1e-9));
  if (n >= grid.size()) throw GridCoverageError("kernel grid ends before t=" + std::to_string(t_max));
  return n;
}

KernelSet build_kernel_set(double alpha, const OffspringLaw& offspring, double h, const TabulatedDistribution& G2,
                           const KernelOptions& opts) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in (0,1]");
  if (!(h >= 0.0 && h < 1.0)) throw InputError("escape probability must lie in [0,1)");
  if (std::abs(G2.total_mass() - 1.0) > 1e-9) throw InputError("return-time law must be proper");
  if (!G2.covers(opts.t_max)) throw GridCoverageError("return-time law does not cover the kernel horizon");

  KernelSet ks;
  ks.alpha = alpha;
  ks.m1 = offspring.mean();
  ks.h = h;
  ks.beta = (1.0 - alpha) * (1.0 - h);
  if (std::abs(ks.mass() - 1.0) > opts.criticality_tol)
    throw CriticalityError("alpha m1 + (1-alpha)(1-h) = " + std::to_string(ks.mass()) + " is not 1");
  ks.c4 = opts.total_rate * (1.0 - alpha) * opts.gamma * h * h;
  ks.step = opts.step;
  ks.G2 = G2;
  ks.grid = uniform_grid(opts.step, opts.t_max);

  const ReturnLaw law(G2);
  ks.c4_tail = ks.beta * law.tail_density_constant();
  const std::size_t n = ks.grid.size();
  const double hs = opts.step;
  ks.decay = std::exp(-hs);
  ks.w1 = (hs + std::expm1(-hs)) / hs;
  ks.w0 = -std::expm1(-hs) - ks.w1;

  ks.j.assign(n, 0.0);
  ks.ebar.assign(n, 1.0);
  ks.gbar.assign(n, 1.0);
  double ibar = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double a = ks.grid[i - 1];
    const double b = ks.grid[i];
    ks.j[i] = ks.decay * ks.j[i - 1] + law.exp_integral(a, b, b, false);
    ibar = ks.decay * ibar + law.exp_integral(a, b, b, true);
    ks.ebar[i] = std::exp(-b) + ibar;
    ks.gbar[i] = law.survival(b);
  }

  ks.W0.assign(n - 1, 0.0);
  ks.W1.assign(n - 1, 0.0);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double t0 = ks.grid[c];
    const double jc = ks.j[c];
    auto j_at = [&](double u) { return std::exp(-(u - t0)) * jc + law.exp_integral(t0, u, u, false); };
    const auto br = law.breaks(t0, ks.grid[c + 1]);
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
      ks.W1[c] += Gauss8::integrate([&](double u) { return j_at(u) * (u - t0) / hs; }, br[p], br[p + 1]);
      ks.W0[c] += Gauss8::integrate([&](double u) { return j_at(u) * (1.0 - (u - t0) / hs); }, br[p], br[p + 1]);
    }
  }

  std::vector<double> kcdf(n);
  std::vector<double> kden(n);
  const double am = alpha * ks.m1;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = ks.grid[i];
    kcdf[i] = -am * std::expm1(-t) + ks.beta * (1.0 - ks.ebar[i]);
    kden[i] = am * std::exp(-t) + ks.beta * std::max(0.0, ks.j[i]);
  }
  for (std::size_t i = 1; i < n; ++i) kcdf[i] = std::max(kcdf[i], kcdf[i - 1]);
  ks.K = TabulatedDistribution(ks.grid, std::move(kcdf), ks.mass(), std::move(kden));
  return ks;
}

std::vector<double> convolve_with_kernel(const KernelSet& ks, std::span<const double> f) {
  const std::size_t n = std::min(f.size(), ks.grid.size());
  std::vector<double> out(n, 0.0);
  const double am = ks.alpha * ks.m1;
  double e = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    e = ks.decay * e + ks.w0 * f[m - 1] + ks.w1 * f[m];
    double b = 0.0;
    for (std::size_t c = 0; c < m; ++c) b += ks.W0[c] * f[m - c] + ks.W1[c] * f[m - c - 1];
    out[m] = am * e + ks.beta * b;
  }
  return out;
}

SolutionTable renewal_function(const TabulatedDistribution& K, std::span<const double> grid) {
  if (grid.size() < 2 || grid.front() != 0.0) throw InputError("renewal grid must start at 0");
  const double hs = grid[1] - grid[0];
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - static_cast<double>(i) * hs) > 1e-9 * std::max(1.0, grid[i]))
      throw InputError("renewal grid must be uniform");
  if (!K.covers(grid.back())) throw GridCoverageError("kernel does not span the renewal grid");
  if (K.total_mass() > 1.0 + 1e-9) throw InputError("renewal kernel mass exceeds 1");

  const std::size_t n = grid.size();
  std::vector<double> kv(n);
  for (std::size_t i = 0; i < n; ++i) kv[i] = K.value(grid[i]);
  const bool hermite = K.density().has_value();
  std::vector<double> kd(n, 0.0);
  if (hermite)
    for (std::size_t i = 0; i < n; ++i) kd[i] = density_at(K, grid[i]);

  // Cell c: a = int (1 - x) dK, b = int x dK.
  std::vector<double> a(n - 1), b(n - 1);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double dk = kv[c + 1] - kv[c];
    b[c] = 0.5 * dk + (hermite ? hs * (kd[c + 1] - kd[c]) / 12.0 : 0.0);
    a[c] = dk - b[c];
  }

  SolutionTable v;
  v.label = "V";
  v.grid.assign(grid.begin(), grid.end());
  v.values.assign(n, 0.0);
  const double diag = 1.0 - kv[0] - a[0];
  if (!(diag > 0.0)) throw InstabilityError("renewal step is singular; refine the grid");
  v.values[0] = 1.0 / (1.0 - kv[0]);
  for (std::size_t m = 1; m < n; ++m) {
    double acc = 1.0 + b[0] * v.values[m - 1];
    for (std::size_t c = 1; c < m; ++c) acc += a[c] * v.values[m - c] + b[c] * v.values[m - c - 1];
    v.values[m] = acc / diag;
    if (v.values[m] < v.values[m - 1] - 1e-10 * v.values[m - 1])
      throw InstabilityError("renewal function decreased at t=" + std::to_string(grid[m]) + "; refine the grid");
  }
  return v;
}

}  // namespace catbrw
