#include <gtest/gtest.h>

#include <cmath>

#include "catbrw/distribution.h"
#include "catbrw/errors.h"
#include "catbrw/kernels.h"
#include "catbrw/moments.h"
#include "fixture.h"

using namespace catbrw;

TEST(Distribution, ValidatesInput) {
  EXPECT_THROW(TabulatedDistribution({0.0, 1.0}, {0.0, 1.1}, 1.0), InputError);
  EXPECT_THROW(TabulatedDistribution({0.0, 1.0}, {0.5, 0.2}, 1.0), InputError);
  EXPECT_THROW(TabulatedDistribution({0.0, 0.0}, {0.0, 0.2}, 1.0), InputError);
  EXPECT_THROW(uniform_grid(0.3, 1.0), InputError);
}

TEST(Distribution, InterpolatesAndInverts) {
  const auto grid = uniform_grid(0.01, 20.0);
  const auto e = TabulatedDistribution::exponential(grid, 2.0);
  EXPECT_NEAR(e.value(1.0), 1 - std::exp(-2.0), 1e-14);
  EXPECT_NEAR(e.value(1.005), 1 - std::exp(-2.01), 2e-5);
  for (double u : {0.1, 0.5, 0.9}) EXPECT_NEAR(e.value(e.quantile(u)), u, 1e-12);
  EXPECT_THROW(e.value(25.0), GridCoverageError);
  double prev = 0.0;
  for (double t = 0.0; t <= 20.0; t += 0.37) {
    EXPECT_GE(e.value(t), prev);
    prev = e.value(t);
  }
}

TEST(Distribution, GeometricGrid) {
  const auto g = geometric_grid(0.1, 1.05, 100.0);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g[1], 0.1, 1e-15);
  EXPECT_NEAR(g[2], 0.105, 1e-15);
  EXPECT_EQ(g.back(), 100.0);
}

TEST(Stieltjes, UnitStepIsIdentity) {
  const auto grid = uniform_grid(0.1, 10.0);
  const auto d = TabulatedDistribution::unit_step(10.0);
  const auto c = stieltjes_convolve(d, d, grid);
  for (double t : {0.0, 1.0, 9.9}) EXPECT_NEAR(c.value(t), 1.0, 1e-14);
}

TEST(Stieltjes, ExponentialSquaredIsGamma2) {
  const auto grid = uniform_grid(0.005, 20.0);
  const auto g1 = TabulatedDistribution::exponential(grid, 1.0);
  const auto c = stieltjes_convolve(g1, g1, grid);
  for (double t : {0.5, 1.0, 5.0}) EXPECT_NEAR(c.value(t), 1 - std::exp(-t) * (1 + t), 1e-4) << "t=" << t;
}

TEST(Stieltjes, DefectiveMassMultiplies) {
  const auto grid = uniform_grid(0.01, 60.0);
  const auto f = TabulatedDistribution::exponential(grid, 1.0);
  const auto g = TabulatedDistribution::exponential(grid, 1.0, 0.4);
  EXPECT_NEAR(stieltjes_convolve(f, g, grid).cdf().back(), 0.4, 1e-6);
}

TEST(KernelSet, PureBranchingIsScaledExponential) {
  const auto f = OffspringLaw::binary(0.5);
  const auto& m = catbrw::testing::default_model();
  KernelOptions ko;
  ko.t_max = 50.0;
  const auto ks = build_kernel_set(1.0, f, m.rt.h, m.rt.g2, ko);
  EXPECT_EQ(ks.beta, 0.0);
  for (double t : {0.5, 3.0, 20.0}) EXPECT_NEAR(ks.K.value(t), f.mean() * (1 - std::exp(-t)), 1e-12);
}

TEST(KernelSet, RejectsNonCriticalTriples) {
  const auto& m = catbrw::testing::default_model();
  KernelOptions ko;
  ko.t_max = 50.0;
  EXPECT_THROW(build_kernel_set(0.5, m.f, m.rt.h, m.rt.g2, ko), CriticalityError);
}

TEST(KernelSet, ProperAtCriticality) {
  const auto& ks = catbrw::testing::default_model().ks;
  EXPECT_NEAR(ks.mass(), 1.0, 1e-4);
  EXPECT_NEAR(ks.K.total_mass(), 1.0, 1e-4);
}

TEST(KernelSet, DensityTailMatchesC4) {
  const auto& ks = catbrw::testing::default_model().ks;
  const double t = 1000.0;
  EXPECT_NEAR(ks.k_density()[ks.last_index(t)] * t * t / ks.c4, 1.0, 0.25);
}

TEST(KernelSet, SurvivalTailFollowsReturnTail) {
  const auto& m = catbrw::testing::default_model();
  const auto& ks = m.ks;
  const double t_max = ks.grid.back();
  for (std::size_t i = ks.last_index(t_max / 10); i < ks.size(); i += 400) {
    const double t = ks.grid[i];
    const double tail = (1 - ks.alpha) * (1 - ks.h) * (1 - ks.G2.value(t));
    const double ratio = (1 - ks.K.cdf()[i]) / tail;
    EXPECT_GE(ratio, 0.8) << "t=" << t;
    EXPECT_LE(ratio, 1.25) << "t=" << t;
  }
}

TEST(KernelSet, Deterministic) {
  const auto& m = catbrw::testing::default_model();
  KernelOptions ko;
  ko.t_max = 100.0;
  ko.gamma = m.gamma.value;
  const auto a = build_kernel_set(m.ks.alpha, m.f, m.rt.h, m.rt.g2, ko);
  const auto b = build_kernel_set(m.ks.alpha, m.f, m.rt.h, m.rt.g2, ko);
  EXPECT_EQ(a.K.cdf(), b.K.cdf());
  EXPECT_EQ(a.W0, b.W0);
  EXPECT_EQ(a.W1, b.W1);
}

TEST(Renewal, ExponentialKernelIsPoisson) {
  const auto grid = uniform_grid(0.05, 100.0);
  const auto v = renewal_function(TabulatedDistribution::exponential(grid, 1.0), grid);
  for (double t : {1.0, 10.0, 100.0}) EXPECT_NEAR(v.at(t), 1 + t, 1e-4) << "t=" << t;
}

TEST(Renewal, DefectiveKernelIsGeometricSeries) {
  const auto grid = uniform_grid(0.05, 100.0);
  const auto v = renewal_function(TabulatedDistribution::exponential(grid, 1.0, 0.5), grid);
  EXPECT_NEAR(v.values.back(), 2.0, 1e-3);
}

TEST(Renewal, MonotoneOnDefaultKernel) {
  const auto& ks = catbrw::testing::default_model().ks;
  const auto v = renewal_function(ks.K, ks.grid);
  for (std::size_t i = 1; i < v.size(); ++i) ASSERT_GE(v.values[i], v.values[i - 1]);
}

// d/dt (G1*V)(t) = int e^-(t-u) dV(u), which is P1.
TEST(Renewal, DifferentiationIdentity) {
  const auto& m = catbrw::testing::default_model();
  const auto& ks = m.ks;
  const auto v = renewal_function(ks.K, ks.grid);
  const std::size_t n = ks.last_index(200.0);
  std::vector<double> gv(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    double acc = (1 - std::exp(-ks.grid[i])) * v.values[0];
    for (std::size_t k = 1; k <= i; ++k) {
      const double mid = 0.5 * (ks.grid[k] + ks.grid[k - 1]);
      acc += (1 - std::exp(-(ks.grid[i] - mid))) * (v.values[k] - v.values[k - 1]);
    }
    gv[i] = acc;
  }
  const auto p1 = compute_P1(ks, 200.0);
  for (double t : {1.0, 10.0, 100.0, 190.0}) {
    const std::size_t i = ks.last_index(t);
    const double deriv = (gv[i + 1] - gv[i - 1]) / (2 * ks.step);
    EXPECT_NEAR(deriv / p1.values[i], 1.0, 5e-3) << "t=" << t;
  }
}

TEST(ConvolveWithKernel, ConstantIntegratesToKernelCdf) {
  const auto& ks = catbrw::testing::default_model().ks;
  const std::vector<double> one(ks.size(), 1.0);
  const auto c = convolve_with_kernel(ks, one);
  for (double t : {1.0, 50.0, 1000.0}) {
    const std::size_t i = ks.last_index(t);
    EXPECT_NEAR(c[i], ks.K.cdf()[i], 1e-6) << "t=" << t;
  }
}
