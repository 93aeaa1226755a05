#pragma once

#include <vector>

#include "catbrw/distribution.h"
#include "catbrw/kernels.h"
#include "catbrw/offspring.h"

namespace catbrw {

// Phi(x) = f'(1) x - 1 + f(1 - x); Psi(x) = Phi(x)/x with Psi(0) = 0.
double phi(const OffspringLaw& f, double x);
double psi(const OffspringLaw& f, double x);

struct SolveOptions {
  double clamp_tol = 1e-8;
  double fixed_point_tol = 1e-15;
  int max_fixed_point = 100;
};

// q(t;s) = (1-s) e^-t + alpha int g(q(t-u)) e^-u du + beta int q(t-u) j(u) du,
// g(x) = 1 - f(1 - x), marched on the kernel grid up to t_max (whole grid if < 0).
SolutionTable solve_q(const KernelSet& ks, const OffspringLaw& f, double s, double t_max = -1.0,
                      const SolveOptions& opts = {});

struct StepHalving {
  double ratio = 0.0;
  double diff_coarse = 0.0;  // |q_h - q_{h/2}|_inf
  double diff_fine = 0.0;    // |q_{h/2} - q_{h/4}|_inf
};

// Rebuilds the kernels at h, h/2, h/4 on [0, t_max] and compares on the coarse nodes.
StepHalving step_halving(double alpha, const OffspringLaw& f, double h, const TabulatedDistribution& G2,
                         KernelOptions opts, double s = 0.0);

// F_0 = s, F_{n+1} = L(f, F_n); returns F_0 .. F_n on [0, t_max].
std::vector<SolutionTable> iterate_operator_L(const OffspringLaw& f, const KernelSet& ks, int n_iterations, double s,
                                              double t_max, double monotone_tol = 1e-8);

struct OperatorLimit {
  SolutionTable limit;
  int iterations = 0;
  double last_change = 0.0;
  double worst_monotonicity = 0.0;  // max over n and t of F_n - F_{n+1}
};

// Iterates L until the sup change falls below tol.
OperatorLimit iterate_operator_L_to_limit(const OffspringLaw& f, const KernelSet& ks, double s, double t_max,
                                          double tol = 1e-13, int max_iterations = 20000,
                                          double monotone_tol = 1e-8);

std::vector<double> chebyshev_s_grid(int points = 32);

struct ComparisonReport {
  bool holds = true;
  double worst_margin = 0.0;  // min over (t, s) of F2 - F1
  double worst_t = 0.0;
  double worst_s = 0.0;
  std::vector<double> s_values;
};

// Solves both laws on the shared kernels and checks F^1 <= F^2 + tol for s in (s0, 1].
ComparisonReport compare_offspring(const OffspringLaw& f1, const OffspringLaw& f2, const KernelSet& ks, double s0,
                                   double t_max, double tol = 1e-6, const std::vector<double>& s_grid = chebyshev_s_grid());

}  // namespace catbrw
