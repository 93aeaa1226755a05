#include "catbrw/volterra.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "catbrw/errors.h"

namespace catbrw {

double phi(const OffspringLaw& f, double x) { return f.mean() * x - 1.0 + f(1.0 - x); }

double psi(const OffspringLaw& f, double x) { return x > 0.0 ? phi(f, x) / x : 0.0; }

namespace {

inline double gain(const OffspringLaw& f, double q) { return 1.0 - f(1.0 - q); }

double clamp_unit(double x, double tol, double t) {
  if (x < -tol || x > 1.0 + tol)
    throw InstabilityError("solution left [0,1] (value " + std::to_string(x) + " at t=" + std::to_string(t) +
                           "); refine the step");
  return std::clamp(x, 0.0, 1.0);
}

// One application of the survival-form operator: returns 1 - L(f, 1 - q).
std::vector<double> apply_operator(const OffspringLaw& f, const KernelSet& ks, const std::vector<double>& q,
                                   double s) {
  const std::size_t n = q.size();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = gain(f, q[i]);
  std::vector<double> out(n);
  out[0] = 1.0 - s;
  double a = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    a = ks.decay * a + ks.w0 * g[m - 1] + ks.w1 * g[m];
    double b = 0.0;
    for (std::size_t c = 0; c < m; ++c) b += ks.W0[c] * q[m - c] + ks.W1[c] * q[m - c - 1];
    out[m] = (1.0 - s) * std::exp(-ks.grid[m]) + ks.alpha * a + ks.beta * b;
  }
  return out;
}

SolutionTable as_table(const KernelSet& ks, std::vector<double> values, const std::string& label, double s) {
  SolutionTable t;
  t.label = label;
  t.grid.assign(ks.grid.begin(), ks.grid.begin() + static_cast<std::ptrdiff_t>(values.size()));
  t.values = std::move(values);
  t.params["s"] = s;
  t.params["step"] = ks.step;
  return t;
}

}  // namespace

SolutionTable solve_q(const KernelSet& ks, const OffspringLaw& f, double s, double t_max, const SolveOptions& opts) {
  if (!(s >= 0.0 && s <= 1.0)) throw InputError("s must lie in [0,1]");
  const std::size_t last = ks.last_index(t_max);
  std::vector<double> q(last + 1);
  q[0] = 1.0 - s;
  double a = 0.0;
  const double implicit_lin = ks.beta * ks.W0[0];
  for (std::size_t m = 1; m <= last; ++m) {
    const double a_part = ks.decay * a + ks.w0 * gain(f, q[m - 1]);
    double b = ks.W1[0] * q[m - 1];
    for (std::size_t c = 1; c < m; ++c) b += ks.W0[c] * q[m - c] + ks.W1[c] * q[m - c - 1];
    const double rhs = (1.0 - s) * std::exp(-ks.grid[m]) + ks.alpha * a_part + ks.beta * b;
    double x = q[m - 1];
    for (int it = 0;; ++it) {
      const double next = rhs + ks.alpha * ks.w1 * gain(f, std::clamp(x, 0.0, 1.0)) + implicit_lin * x;
      const bool done = std::abs(next - x) <= opts.fixed_point_tol * std::max(1.0, std::abs(next));
      x = next;
      if (done) break;
      if (it >= opts.max_fixed_point)
        throw NonConvergenceError("implicit step did not converge at t=" + std::to_string(ks.grid[m]));
    }
    q[m] = clamp_unit(x, opts.clamp_tol, ks.grid[m]);
    a = a_part + ks.w1 * gain(f, q[m]);
  }
  auto table = as_table(ks, std::move(q), s == 0.0 ? "q" : "q(t;s)", s);
  table.params["order"] = 2.0;
  return table;
}

StepHalving step_halving(double alpha, const OffspringLaw& f, double h, const TabulatedDistribution& G2,
                         KernelOptions opts, double s) {
  std::vector<std::vector<double>> sols;
  const double base = opts.step;
  for (int r = 0; r < 3; ++r) {
    opts.step = base / static_cast<double>(1 << r);
    const KernelSet ks = build_kernel_set(alpha, f, h, G2, opts);
    sols.push_back(solve_q(ks, f, s).values);
  }
  StepHalving out;
  for (std::size_t i = 0; i < sols[0].size(); ++i) {
    out.diff_coarse = std::max(out.diff_coarse, std::abs(sols[0][i] - sols[1][2 * i]));
    out.diff_fine = std::max(out.diff_fine, std::abs(sols[1][2 * i] - sols[2][4 * i]));
  }
  out.ratio = out.diff_fine > 0.0 ? out.diff_coarse / out.diff_fine : std::numeric_limits<double>::infinity();
  return out;
}

std::vector<SolutionTable> iterate_operator_L(const OffspringLaw& f, const KernelSet& ks, int n_iterations, double s,
                                              double t_max, double monotone_tol) {
  if (!(s >= 0.0 && s <= 1.0)) throw InputError("s must lie in [0,1]");
  if (n_iterations < 0) throw InputError("iteration count must be nonnegative");
  const std::size_t last = ks.last_index(t_max);
  std::vector<double> q(last + 1, 1.0 - s);
  std::vector<SolutionTable> out;
  auto push = [&](const std::vector<double>& qs, int n) {
    std::vector<double> F(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) F[i] = 1.0 - qs[i];
    auto t = as_table(ks, std::move(F), "F", s);
    t.params["n"] = n;
    out.push_back(std::move(t));
  };
  push(q, 0);
  for (int n = 0; n < n_iterations; ++n) {
    auto next = apply_operator(f, ks, q, s);
    for (std::size_t i = 0; i < q.size(); ++i)
      if (next[i] - q[i] > monotone_tol)
        throw ConsistencyError("iterate " + std::to_string(n + 1) + " decreased F at t=" + std::to_string(ks.grid[i]));
    q = std::move(next);
    push(q, n + 1);
  }
  return out;
}

OperatorLimit iterate_operator_L_to_limit(const OffspringLaw& f, const KernelSet& ks, double s, double t_max,
                                          double tol, int max_iterations, double monotone_tol) {
  if (!(s >= 0.0 && s <= 1.0)) throw InputError("s must lie in [0,1]");
  const std::size_t last = ks.last_index(t_max);
  std::vector<double> q(last + 1, 1.0 - s);
  OperatorLimit out;
  out.worst_monotonicity = -std::numeric_limits<double>::infinity();
  for (int n = 1; n <= max_iterations; ++n) {
    auto next = apply_operator(f, ks, q, s);
    double change = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double rise = next[i] - q[i];  // F_n - F_{n+1}
      out.worst_monotonicity = std::max(out.worst_monotonicity, rise);
      if (rise > monotone_tol)
        throw ConsistencyError("iterate " + std::to_string(n) + " decreased F at t=" + std::to_string(ks.grid[i]));
      change = std::max(change, std::abs(rise));
    }
    q = std::move(next);
    out.iterations = n;
    out.last_change = change;
    if (change < tol) break;
  }
  if (out.last_change >= tol)
    throw NonConvergenceError("operator iteration still moving by " + std::to_string(out.last_change));
  for (double& v : q) v = 1.0 - v;
  out.limit = as_table(ks, std::move(q), "F", s);
  return out;
}

std::vector<double> chebyshev_s_grid(int points) {
  std::vector<double> s(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) s[i] = 0.5 * (1.0 - std::cos(std::numbers::pi * i / (points - 1)));
  s.front() = 0.0;
  s.back() = 1.0;
  return s;
}

ComparisonReport compare_offspring(const OffspringLaw& f1, const OffspringLaw& f2, const KernelSet& ks, double s0,
                                   double t_max, double tol, const std::vector<double>& s_grid) {
  if (!(s0 >= 0.0 && s0 < 1.0)) throw InputError("s0 must lie in [0,1)");
  for (int i = 1; i <= 1000; ++i) {
    const double s = s0 + (1.0 - s0) * i / 1000.0;
    if (f1(s) > f2(s) + 1e-12)
      throw InputError("f1 exceeds f2 at s=" + std::to_string(s) + " inside (s0,1]");
  }
  const double beta = ks.beta;
  for (const OffspringLaw* f : {&f1, &f2})
    if (std::abs(ks.alpha * f->mean() + beta - 1.0) > 1e-4)
      throw CriticalityError("offspring law is not critical for the shared alpha and h");

  ComparisonReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (double s : s_grid) {
    if (!(s > s0)) continue;
    rep.s_values.push_back(s);
    const auto q1 = solve_q(ks, f1, s, t_max);
    const auto q2 = solve_q(ks, f2, s, t_max);
    for (std::size_t i = 0; i < q1.size(); ++i) {
      const double margin = q1.values[i] - q2.values[i];  // F2 - F1
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_t = q1.grid[i];
        rep.worst_s = s;
      }
    }
  }
  rep.holds = rep.worst_margin >= -tol;
  return rep;
}

}  // namespace catbrw
