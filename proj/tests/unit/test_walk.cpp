#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "catbrw/errors.h"
#include "catbrw/rng.h"
#include "catbrw/walk.h"
#include "fixture.h"

using namespace catbrw;
using catbrw::testing::simple_walk_return_bessel;

namespace {

WalkSpec anisotropic(std::array<double, 4> rates) {
  std::vector<Jump> jumps;
  for (int i = 0; i < 4; ++i)
    for (int sign : {-1, 1}) {
      std::vector<int> x(4, 0);
      x[static_cast<std::size_t>(i)] = sign;
      jumps.push_back({x, rates[static_cast<std::size_t>(i)] / 2});
    }
  return WalkSpec(4, jumps);
}

}  // namespace

TEST(WalkSpec, RejectsAsymmetricAndReducibleSpecs) {
  EXPECT_THROW(WalkSpec(2, {{{1, 0}, 1.0}, {{-1, 0}, 0.5}, {{0, 1}, 1.0}, {{0, -1}, 1.0}}), InputError);
  EXPECT_THROW(WalkSpec(2, {{{2, 0}, 1.0}, {{-2, 0}, 1.0}, {{0, 1}, 1.0}, {{0, -1}, 1.0}}), InputError);
  EXPECT_THROW(WalkSpec(2, {{{1, 0}, 1.0}, {{-1, 0}, 1.0}}), InputError);
  EXPECT_NO_THROW(WalkSpec(2, {{{1, 1}, 1.0}, {{-1, -1}, 1.0}, {{1, 0}, 1.0}, {{-1, 0}, 1.0}}));
}

TEST(WalkSpec, SimpleWalkMoments) {
  const auto w = WalkSpec::simple(4, 2.0);
  EXPECT_DOUBLE_EQ(w.total_rate(), 2.0);
  EXPECT_DOUBLE_EQ(w.second_moment(), 2.0);
  EXPECT_TRUE(w.axis_separable());
  const auto pi = w.first_step_law();
  ASSERT_EQ(pi.size(), 8u);
  for (double p : pi) EXPECT_DOUBLE_EQ(p, 1.0 / 8);
}

TEST(CharacteristicExponent, ZeroAtOrigin) {
  const auto w = WalkSpec::simple(4, 1.0);
  const std::vector<double> zero(4, 0.0);
  EXPECT_EQ(characteristic_exponent(w, zero), 0.0);
}

TEST(CharacteristicExponent, CornerMatchesBruteForceSum) {
  const double a = 1.7;
  const auto w = WalkSpec::simple(4, a);
  const std::vector<double> th(4, std::numbers::pi);
  double brute = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int s : {-1, 1}) brute += (a / 8) * (std::cos(s * th[static_cast<std::size_t>(i)]) - 1.0);
  EXPECT_NEAR(characteristic_exponent(w, th), brute, 1e-14);
  EXPECT_NEAR(characteristic_exponent(w, th), -2 * a, 1e-14);
}

TEST(CharacteristicExponent, EvenAndNonPositive) {
  const WalkSpec w(3, {{{1, 1, 0}, 0.3},
                       {{-1, -1, 0}, 0.3},
                       {{1, 0, 0}, 0.2},
                       {{-1, 0, 0}, 0.2},
                       {{0, 0, 1}, 0.1},
                       {{0, 0, -1}, 0.1},
                       {{0, 1, -1}, 0.05},
                       {{0, -1, 1}, 0.05}});
  RngStream rng(3, StreamTag::Occupation, 0);
  for (int n = 0; n < 200; ++n) {
    std::vector<double> th(3), neg(3);
    for (int i = 0; i < 3; ++i) {
      th[static_cast<std::size_t>(i)] = std::numbers::pi * (2 * rng.uniform() - 1);
      neg[static_cast<std::size_t>(i)] = -th[static_cast<std::size_t>(i)];
    }
    const double v = characteristic_exponent(w, th);
    EXPECT_LT(v, 0.0);
    EXPECT_DOUBLE_EQ(v, characteristic_exponent(w, neg));
  }
}

TEST(TransitionProbability, StartsAtOne) {
  EXPECT_NEAR(transition_probability_origin(WalkSpec::simple(4, 1.0), 0.0), 1.0, 1e-15);
}

TEST(TransitionProbability, MatchesBesselProduct) {
  const auto w = WalkSpec::simple(4, 1.0);
  for (double t : {0.5, 1.0, 5.0, 20.0, 100.0, 400.0, 1600.0}) {
    const double want = simple_walk_return_bessel(4, 1.0, t);
    EXPECT_NEAR(transition_probability_origin(w, t) / want, 1.0, 1e-10) << "t=" << t;
  }
}

TEST(TransitionProbability, TSquaredApproachesLimit) {
  const auto w = WalkSpec::simple(4, 1.0);
  const double ref = transition_probability_origin(w, 400.0) * 400.0 * 400.0;
  for (double t : {50.0, 100.0, 200.0})
    EXPECT_NEAR(transition_probability_origin(w, t) * t * t / ref, 1.0, 0.10) << "t=" << t;
}

TEST(TransitionProbability, NeverJumpLowerBound) {
  const WalkSpec tensor(3, {{{1, 1, 1}, 0.5}, {{-1, -1, -1}, 0.5}, {{1, 0, 0}, 0.5}, {{-1, 0, 0}, 0.5},
                            {{0, 1, 0}, 0.5}, {{0, -1, 0}, 0.5}});
  ASSERT_FALSE(tensor.axis_separable());
  for (const auto& w : {WalkSpec::simple(4, 1.0), tensor})
    for (double t : {0.1, 1.0, 3.0, 10.0}) EXPECT_GE(transition_probability_origin(w, t), std::exp(-w.total_rate() * t));
}

TEST(TransitionProbability, TimeChangeCovariance) {
  const auto w = anisotropic({0.1, 0.2, 0.3, 0.4});
  std::vector<Jump> scaled = w.jumps();
  for (auto& j : scaled) j.rate *= 2.5;
  const WalkSpec w2(4, scaled);
  for (double t : {0.7, 4.0, 30.0})
    EXPECT_NEAR(transition_probability_origin(w2, t), transition_probability_origin(w, 2.5 * t), 1e-10);
}

TEST(TransitionProbability, MatchesMonteCarloOccupation) {
  const auto w = WalkSpec::simple(4, 1.0);
  const long n = 200000;
  for (double t : {1.0, 5.0, 20.0}) {
    long hits = 0;
    for (long r = 0; r < n; ++r) {
      RngStream rng(11, StreamTag::Occupation, static_cast<std::uint64_t>(r));
      std::array<int, 4> x{};
      double clock = rng.exponential(1.0);
      while (clock <= t) {
        const auto dir = static_cast<std::size_t>(rng() % 8);
        x[dir / 2] += (dir % 2) ? 1 : -1;
        clock += rng.exponential(1.0);
      }
      hits += std::all_of(x.begin(), x.end(), [](int v) { return v == 0; });
    }
    const double p = transition_probability_origin(w, t);
    const double se = std::sqrt(p * (1 - p) / n);
    EXPECT_LT(std::abs(static_cast<double>(hits) / n - p), 3 * se) << "t=" << t;
  }
}

TEST(Gamma, SimpleWalkMatchesLocalLimit) {
  const auto w = WalkSpec::simple(4, 1.0);
  const auto g = gamma_d(w);
  EXPECT_LT(g.error / g.value, 0.01);
  EXPECT_NEAR(gamma_gaussian(w), 4.0 / (std::numbers::pi * std::numbers::pi), 1e-14);
  EXPECT_NEAR(g.value / gamma_gaussian(w), 1.0, 0.01);
}

TEST(Gamma, InvariantUnderRelabelling) {
  const auto g1 = gamma_d(anisotropic({0.1, 0.2, 0.3, 0.4})).value;
  const auto g2 = gamma_d(anisotropic({0.4, 0.1, 0.3, 0.2})).value;
  EXPECT_NEAR(g1 / g2, 1.0, 1e-10);
}

TEST(Gamma, RateDoublingScalesByPowerOfTwo) {
  const auto g1 = gamma_d(WalkSpec::simple(4, 1.0)).value;
  const auto g2 = gamma_d(WalkSpec::simple(4, 2.0)).value;
  EXPECT_NEAR(g2 / g1, 0.25, 1e-3);
}

TEST(Excursion, TinyHorizonNeverReturns) {
  const auto w = WalkSpec::simple(4, 1.0);
  const ExcursionSampler sampler(w);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    RngStream rng(5, StreamTag::Excursion, i);
    EXPECT_FALSE(sampler(1e-12, rng).returned);
  }
}

TEST(Excursion, ReturnedDurationsAreWithinHorizon) {
  const auto w = WalkSpec::simple(3, 1.0);
  for (std::uint64_t i = 0; i < 5000; ++i) {
    RngStream rng(9, StreamTag::Excursion, i);
    const auto out = sample_excursion(w, 50.0, rng);
    if (out.returned) {
      EXPECT_GT(out.time, 0.0);
      EXPECT_LE(out.time, 50.0);
    } else {
      EXPECT_EQ(out.time, 50.0);
    }
  }
}

TEST(EscapeProbability, RejectsRecurrentDimensions) {
  EXPECT_THROW(estimate_escape_probability(WalkSpec::simple(2, 1.0), 10, 10.0, 1), UnsupportedDimensionError);
}

TEST(EscapeProbability, SingleReplicateIsDegenerate) {
  const auto e = estimate_escape_probability(WalkSpec::simple(4, 1.0), 1, 100.0, 3);
  EXPECT_TRUE(e.value == 0.0 || e.value == 1.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(EscapeProbability, DeterministicAndThreadIndependent) {
  const auto w = WalkSpec::simple(4, 1.0);
  const auto a = estimate_escape_probability(w, 10000, 200.0, 42, 1);
  const auto b = estimate_escape_probability(w, 10000, 200.0, 42, 1);
  const auto c = estimate_escape_probability(w, 10000, 200.0, 42, 3);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.value, c.value);
}

TEST(EscapeProbability, ConsistentAcrossHorizons) {
  const auto w = WalkSpec::simple(4, 1.0);
  const auto e1 = estimate_escape_probability(w, 10000, 1e4, 21);
  const auto e2 = estimate_escape_probability(w, 10000, 4e4, 22);
  const double bias = 2 * 0.41 * e1.value * e1.value / (2 * 1e4);
  EXPECT_LT(std::abs(e1.value - e2.value), 3 * std::hypot(e1.std_error, e2.std_error) + bias);
}

TEST(EscapeProbability, NonIncreasingInHorizon) {
  const auto w = WalkSpec::simple(4, 1.0);
  double prev = 1.0, prev_se = 0.0;
  for (double H : {10.0, 100.0, 1000.0}) {
    const auto e = estimate_escape_probability(w, 20000, H, 8);
    EXPECT_LE(e.value, prev + 3 * std::hypot(e.std_error, prev_se)) << "H=" << H;
    prev = e.value;
    prev_se = e.std_error;
  }
}

TEST(EscapeProbability, CensorCorrectionInvertsQuadraticBias) {
  const double h = 0.8, a = 1.0, gamma = 0.4, H = 1000.0;
  const double c = 2 * a * gamma / (2 * std::pow(H, 1.0));
  EXPECT_NEAR(censor_corrected_escape(h + c * h * h, a, gamma, 4, H), h, 1e-14);
}

// Expected time at the origin is int p(t;0) dt = 1/(a h).
TEST(EscapeProbability, MatchesGreenFunctionIntegral) {
  using boost::math::quadrature::gauss_kronrod;
  auto p = [](double t) { return simple_walk_return_bessel(4, 1.0, t); };
  double green = 0.0;
  const double cuts[] = {0.0, 1.0, 10.0, 100.0, 1000.0, 2000.0};
  for (int i = 0; i < 5; ++i) green += gauss_kronrod<double, 61>::integrate(p, cuts[i], cuts[i + 1], 15, 1e-13);
  const double T = 2000.0;
  green += 4.0 / (std::numbers::pi * std::numbers::pi) / T;  // gamma t^-2 tail
  const double h_oracle = 1.0 / green;
  const auto& m = catbrw::testing::default_model();
  EXPECT_LT(std::abs(m.rt.h - h_oracle), 3 * m.rt.h_raw_se + 1e-4);
}

TEST(ReturnTable, BasicShape) {
  const auto& m = catbrw::testing::default_model();
  const auto& g2 = m.rt.g2;
  EXPECT_EQ(g2.value(0.0), 0.0);
  double prev = 0.0;
  for (double v : g2.cdf()) {
    EXPECT_GE(v, prev);
    EXPECT_LE(v, 1.0);
    prev = v;
  }
  ASSERT_TRUE(g2.tail().has_value());
  const double S = g2.tail()->splice;
  EXPECT_LT(std::abs(g2.cdf().back() - (1.0 - g2.tail()->constant * std::pow(S, -g2.tail()->exponent))), 1e-3);
  EXPECT_LE(g2.value(1e6), 1.0);
}

TEST(ReturnTable, TailConstantNearTheory) {
  const auto& m = catbrw::testing::default_model();
  const double S = m.rt.g2.grid_max();
  const double theory = 2 * m.gamma.value * m.rt.h * m.rt.h / ((1 - m.rt.h) * 2);
  EXPECT_NEAR(m.rt.tail_constant_theory, theory, 1e-12);
  EXPECT_NEAR((1 - m.rt.g2.value(S)) * S / theory, 1.0, 0.25);
}

TEST(ReturnTable, SparseCellsAreRejected) {
  const auto w = WalkSpec::simple(4, 1.0);
  EXPECT_THROW(tabulate_return_cdf(w, geometric_grid(0.1, 1.05, 100.0), 2000, 1000.0, 1), TabulationQualityError);
}
