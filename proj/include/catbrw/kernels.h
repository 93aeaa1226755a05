#pragma once

#include <span>
#include <vector>

#include "catbrw/distribution.h"
#include "catbrw/offspring.h"

namespace catbrw {

// (F*G)(t) = int_0^t F(t-u) dG(u) by trapezoidal Stieltjes sums on the target grid;
// an atom of G at 0 contributes F(t) G(0).
TabulatedDistribution stieltjes_convolve(const TabulatedDistribution& F, const TabulatedDistribution& G,
                                         std::span<const double> grid);

struct KernelOptions {
  double step = 0.05;
  double t_max = 2000.0;
  double criticality_tol = 1e-4;
  // Walk constants entering the tail constant a (1 - alpha) gamma h^2.
  double total_rate = 1.0;
  double gamma = 0.0;
  int dimension = 4;
};

// Mixture kernel K = alpha m1 G1 + beta G1*G2 with beta = (1 - alpha)(1 - h) on a
// uniform grid, together with the product-integration weights used by the
// solvers.
struct KernelSet {
  double alpha = 0.0;
  double m1 = 0.0;
  double h = 0.0;
  double beta = 0.0;
  double c4 = 0.0;       // a (1 - alpha) gamma h^2
  double c4_tail = 0.0;  // beta times the density constant of the G2 tail patch
  double step = 0.0;
  TabulatedDistribution G2;
  TabulatedDistribution K;  // carries k = K' as its density
  std::vector<double> grid;
  std::vector<double> j;     // density of G1*G2
  std::vector<double> ebar;  // 1 - G1*G2
  std::vector<double> gbar;  // 1 - G2
  // Cell c = [t_c, t_c + step]: W0[c] = int j (1 - x), W1[c] = int j x, x = (u - t_c)/step.
  std::vector<double> W0;
  std::vector<double> W1;
  // Exponential-memory weights for linear data on one cell.
  double decay = 0.0;  // e^-step
  double w0 = 0.0;
  double w1 = 0.0;

  double mass() const noexcept { return alpha * m1 + beta; }
  const std::vector<double>& k_density() const { return *K.density(); }
  std::size_t size() const noexcept { return grid.size(); }
  // Index of the last node with t <= t_max (whole grid when t_max < 0).
  std::size_t last_index(double t_max) const;
};

KernelSet build_kernel_set(double alpha, const OffspringLaw& offspring, double h, const TabulatedDistribution& G2,
                           const KernelOptions& opts = {});

// out[n] = int_0^{t_n} f(t_n - u) k(u) du for the piecewise-linear interpolant of f.
std::vector<double> convolve_with_kernel(const KernelSet& ks, std::span<const double> f);

// V = 1 + K*V on a uniform grid. Uses the kernel density, when tabulated, to
// integrate the linear interpolant of V exactly against a Hermite cubic of K.
SolutionTable renewal_function(const TabulatedDistribution& K, std::span<const double> grid);

}  // namespace catbrw
