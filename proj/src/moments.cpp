#include "catbrw/moments.h"

#include <cmath>
#include <functional>
#include <string>

#include "catbrw/errors.h"

namespace catbrw {

namespace {

std::uint64_t factorial(int n) {
  std::uint64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace

std::vector<PartitionTerm> enumerate_partitions(int n, int k) {
  if (k < 2 || k > n) throw InputError("partition enumeration needs 2 <= k <= n");
  if (n > 20) throw InputError("partition weights overflow beyond n = 20");
  std::vector<PartitionTerm> out;
  std::vector<int> j(static_cast<std::size_t>(n - 1), 0);
  // Assign multiplicities from the largest part down.
  std::function<void(int, int, int)> rec = [&](int part, int remaining_sum, int remaining_blocks) {
    if (part == 0) {
      if (remaining_sum == 0 && remaining_blocks == 0) {
        PartitionTerm t;
        t.j = j;
        t.k = k;
        std::uint64_t w = factorial(n);
        for (int i = 1; i < n; ++i) {
          const int ji = j[static_cast<std::size_t>(i - 1)];
          w /= factorial(ji);
          for (int r = 0; r < ji; ++r) w /= factorial(i);
        }
        t.weight = w;
        out.push_back(std::move(t));
      }
      return;
    }
    for (int m = 0; m * part <= remaining_sum && m <= remaining_blocks; ++m) {
      j[static_cast<std::size_t>(part - 1)] = m;
      rec(part - 1, remaining_sum - m * part, remaining_blocks - m);
    }
    j[static_cast<std::size_t>(part - 1)] = 0;
  };
  rec(n - 1, n, k);
  return out;
}

boost::rational<long long> inverse_factorial_sum(int n, int k) {
  boost::rational<long long> sum(0);
  for (const auto& t : enumerate_partitions(n, k)) {
    long long denom = 1;
    for (int ji : t.j) denom *= static_cast<long long>(factorial(ji));
    sum += boost::rational<long long>(1, denom);
  }
  return sum;
}

SolutionTable compute_P1(const KernelSet& ks, double t_max) {
  const std::size_t last = ks.last_index(t_max);
  std::vector<double> grid(ks.grid.begin(), ks.grid.begin() + static_cast<std::ptrdiff_t>(last + 1));
  const SolutionTable v = renewal_function(ks.K, grid);
  SolutionTable p;
  p.label = "P1";
  p.grid = grid;
  p.values.assign(grid.size(), 0.0);
  p.values[0] = v.values[0];
  const double rise = -std::expm1(-ks.step) / ks.step;
  for (std::size_t m = 1; m < grid.size(); ++m)
    p.values[m] = ks.decay * p.values[m - 1] + (v.values[m] - v.values[m - 1]) * rise;
  p.params["n"] = 1;
  return p;
}

SolutionTable compute_P1_direct(const KernelSet& ks, double t_max) {
  const std::size_t last = ks.last_index(t_max);
  std::vector<double> p(last + 1);
  p[0] = 1.0;
  const double am = ks.alpha * ks.m1;
  const double diag = 1.0 - am * ks.w1 - ks.beta * ks.W0[0];
  double e = 0.0;
  for (std::size_t m = 1; m <= last; ++m) {
    const double e_part = ks.decay * e + ks.w0 * p[m - 1];
    double b = ks.W1[0] * p[m - 1];
    for (std::size_t c = 1; c < m; ++c) b += ks.W0[c] * p[m - c] + ks.W1[c] * p[m - c - 1];
    p[m] = (std::exp(-ks.grid[m]) + am * e_part + ks.beta * b) / diag;
    e = e_part + ks.w1 * p[m];
  }
  SolutionTable t;
  t.label = "P1";
  t.grid.assign(ks.grid.begin(), ks.grid.begin() + static_cast<std::ptrdiff_t>(last + 1));
  t.values = std::move(p);
  t.params["n"] = 1;
  return t;
}

SolutionTable compute_Hn(int n, std::span<const SolutionTable> lower, const OffspringLaw& f) {
  if (n < 2) throw InputError("H_n is defined for n >= 2");
  if (static_cast<int>(lower.size()) < n - 1) throw InputError("H_n needs P_1 .. P_{n-1}");
  if (n > f.derivative_order())
    throw DerivativeOrderError("H_" + std::to_string(n) + " needs f^(" + std::to_string(n) + ")(1); law caches order " +
                               std::to_string(f.derivative_order()));
  const std::size_t size = lower[0].size();
  for (int i = 1; i < n - 1; ++i)
    if (lower[static_cast<std::size_t>(i)].size() != size) throw InputError("moment tables on different grids");

  SolutionTable h;
  h.label = "H" + std::to_string(n);
  h.grid = lower[0].grid;
  h.values.assign(size, 0.0);
  h.params["n"] = n;
  for (int k = 2; k <= n; ++k) {
    const double fk = f.derivative(k);
    if (fk == 0.0) continue;
    for (const auto& term : enumerate_partitions(n, k)) {
      const double w = fk * static_cast<double>(term.weight);
      for (std::size_t t = 0; t < size; ++t) {
        double prod = w;
        for (int i = 1; i < n; ++i) {
          const int ji = term.j[static_cast<std::size_t>(i - 1)];
          if (ji) prod *= std::pow(lower[static_cast<std::size_t>(i - 1)].values[t], ji);
        }
        h.values[t] += prod;
      }
    }
  }
  return h;
}

std::vector<SolutionTable> compute_moments(const KernelSet& ks, const OffspringLaw& f, int max_n, double t_max,
                                           int max_order) {
  if (max_n < 1) throw InputError("moment order must be positive");
  if (max_n > max_order) throw InputError("moment order " + std::to_string(max_n) + " exceeds the configured cap");
  std::vector<SolutionTable> p;
  p.reserve(static_cast<std::size_t>(max_n));
  p.push_back(compute_P1(ks, t_max));
  const std::size_t size = p[0].size();
  const auto& p1 = p[0].values;
  for (int n = 2; n <= max_n; ++n) {
    const SolutionTable hn = compute_Hn(n, p, f);
    SolutionTable pn;
    pn.label = "P" + std::to_string(n);
    pn.grid = p[0].grid;
    pn.values.assign(size, 0.0);
    pn.params["n"] = n;
    for (std::size_t m = 1; m < size; ++m) {
      double acc = 0.5 * (hn.values[m] * p1[0] + hn.values[0] * p1[m]);
      for (std::size_t i = 1; i < m; ++i) acc += hn.values[m - i] * p1[i];
      pn.values[m] = ks.alpha * ks.step * acc;
    }
    p.push_back(std::move(pn));
  }
  return p;
}

SolutionTable compute_Pn(int n, const KernelSet& ks, const OffspringLaw& f, double t_max, int max_order) {
  return compute_moments(ks, f, n, t_max, max_order).back();
}

double asymptotic_Pn(int n, double t, double c4, double alpha, double f2) {
  if (!(t > 1.0)) throw InputError("asymptotic predictor needs t > 1");
  const double l = std::log(t);
  return static_cast<double>(factorial(n)) * std::pow(0.5 * alpha * f2, n - 1) * std::pow(c4, -(2 * n - 1)) *
         std::pow(t, n - 1) / std::pow(l, 2 * n - 1);
}

}  // namespace catbrw
