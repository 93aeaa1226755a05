#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <boost/rational.hpp>

#include "catbrw/distribution.h"
#include "catbrw/kernels.h"
#include "catbrw/offspring.h"

namespace catbrw {

// Multi-index (j_1, ..., j_{n-1}) with sum i j_i = n and sum j_i = k.
struct PartitionTerm {
  std::vector<int> j;  // j[0] is j_1
  int k = 0;
  std::uint64_t weight = 0;  // n! / prod(j_i! (i!)^{j_i})
};

std::vector<PartitionTerm> enumerate_partitions(int n, int k);

// sum over the k-block terms of 1 / prod j_i!, exactly.
boost::rational<long long> inverse_factorial_sum(int n, int k);

inline constexpr int kDefaultMaxMomentOrder = 6;

// P_1 = (1 - G1) * V_K.
SolutionTable compute_P1(const KernelSet& ks, double t_max = -1.0);
// P_1 from its own renewal equation P_1 = e^-t + P_1 * k; independent of V_K.
SolutionTable compute_P1_direct(const KernelSet& ks, double t_max = -1.0);

// H_n(t) = sum_{k=2}^n f^(k)(1) sum_j weight prod P_i(t)^{j_i}; lower holds P_1 .. P_{n-1}.
SolutionTable compute_Hn(int n, std::span<const SolutionTable> lower, const OffspringLaw& f);

// P_1 .. P_{max_n}; P_n = alpha int H_n(t-u) P_1(u) du for n >= 2.
std::vector<SolutionTable> compute_moments(const KernelSet& ks, const OffspringLaw& f, int max_n, double t_max = -1.0,
                                           int max_order = kDefaultMaxMomentOrder);
SolutionTable compute_Pn(int n, const KernelSet& ks, const OffspringLaw& f, double t_max = -1.0,
                         int max_order = kDefaultMaxMomentOrder);

// n! (alpha f2 / 2)^{n-1} c4^{-(2n-1)} t^{n-1} / log^{2n-1} t.
double asymptotic_Pn(int n, double t, double c4, double alpha, double f2);

}  // namespace catbrw
