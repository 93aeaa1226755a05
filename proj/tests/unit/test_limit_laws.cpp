#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "catbrw/errors.h"
#include "catbrw/limit_laws.h"

using namespace catbrw;

TEST(CalibrateAlpha, Examples) {
  EXPECT_EQ(calibrate_alpha(1.0, 0.8), 1.0);
  const double a = calibrate_alpha(2.0, 0.8);
  EXPECT_NEAR(a, 4.0 / 9, 1e-15);
  EXPECT_NEAR(a * 2 + (1 - a) * 0.2, 1.0, 1e-15);
  EXPECT_THROW(calibrate_alpha(0.5, 0.8), NoSolutionError);
}

TEST(Yaglom, CdfAndLaplace) {
  EXPECT_NEAR(yaglom_cdf(0.0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(yaglom_cdf(1e9), 1.0, 1e-15);
  EXPECT_NEAR(yaglom_laplace(0.0), 1.0, 1e-15);
  EXPECT_NEAR(yaglom_laplace(1.0), 1.0 / 3 + (2.0 / 3) * (2.0 / 5), 1e-15);
}

TEST(Yaglom, MomentsByIntegration) {
  boost::math::quadrature::exp_sinh<double> q;
  for (int n = 1; n <= 3; ++n) {
    auto density = [n](double x) { return x > 0 ? (4.0 / 9) * std::exp(n * std::log(x) - 2 * x / 3) : 0.0; };
    const double num = q.integrate(density, 0.0, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(num / yaglom_moment(n), 1.0, 1e-10) << n;
    EXPECT_NEAR(yaglom_moment(n), (2.0 / 3) * std::pow(1.5, n) * std::tgamma(n + 1.0), 1e-12);
  }
}

TEST(Asymptotes, ProductReproducesFirstMoment) {
  const auto c = make_constants(1.0, 1.0, 0.405, 0.0, 0.806, 0.0, 0.446, OffspringLaw::binary(1.0));
  for (double t : {1e2, 1e4}) {
    const double prod = survival_asymptote(t, c) * conditional_mean_asymptote(t, c);
    EXPECT_NEAR(prod / first_moment_asymptote(t, c), 1.0, 1e-13);
  }
}

TEST(Asymptotes, SurvivalPredictorDecreases) {
  const auto c = make_constants(1.0, 1.0, 0.405, 0.0, 0.806, 0.0, 0.446, OffspringLaw::binary(1.0));
  double prev = survival_asymptote(3.0, c);
  for (double t = 3.5; t < 1e5; t *= 1.3) {
    const double v = survival_asymptote(t, c);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(ModelConstants, PureFunctionOfInputs) {
  const auto f = OffspringLaw::binary(1.0);
  const auto a = make_constants(1.0, 1.0, 0.405, 0.001, 0.806, 0.0004, 0.446, f);
  const auto b = make_constants(1.0, 1.0, 0.405, 0.001, 0.806, 0.0004, 0.446, f);
  EXPECT_EQ(a.to_text(), b.to_text());
  EXPECT_NEAR(a.c4, 1.0 * (1 - 0.446) * 0.405 * 0.806 * 0.806, 1e-15);
  EXPECT_NEAR(a.C, 3 * a.c4 / (0.446 * 2.0), 1e-15);
}

TEST(Sandwich, FiniteSupportIsTrivial) {
  const auto f = OffspringLaw({0.25, 0.25, 0.25, 0.25});
  const auto sw = build_sandwich(f, 0.1);
  EXPECT_TRUE(sw.trivial);
  EXPECT_EQ(sw.s0, 0.0);
  EXPECT_EQ(sw.minus.coefficients(), f.coefficients());
  EXPECT_EQ(sw.plus.coefficients(), f.coefficients());
}

// Brute-force moments of N and N∧k over the stored support.
TEST(Sandwich, GeometricHalfConstruction) {
  const double eps = 0.1;
  const auto f = OffspringLaw::geometric(0.5);
  const auto sw = build_sandwich(f, eps);
  ASSERT_FALSE(sw.trivial);
  const auto& c = f.coefficients();
  const int k = sw.cutoff;
  double tail = 0.0, deficit = 0.0, mean_min = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double N = static_cast<double>(n);
    tail += c[n] * N * std::max(0.0, N - k);
    deficit += c[n] * std::max(0.0, k - N);
    mean_min += c[n] * std::min<double>(N, k);
  }
  EXPECT_NEAR(tail, sw.tail_moment, 1e-14);
  EXPECT_LE(tail, eps / 3);
  EXPECT_GT(tail, 0.0);
  EXPECT_GE(deficit, 1.0);
  EXPECT_NEAR(mean_min + sw.r, 1.0, 1e-12);
  EXPECT_NEAR(sw.ell * sw.b, sw.r, 1e-14);
  EXPECT_NEAR(sw.minus.mean(), 1.0, 1e-12);
  EXPECT_NEAR(sw.plus.mean(), 1.0, 1e-12);
  EXPECT_LT(sw.minus.variance(), f.variance());
  EXPECT_LT(f.variance(), sw.plus.variance());
  EXPECT_LE(f.variance() - sw.minus.variance(), eps);
  EXPECT_LE(sw.plus.variance() - f.variance(), eps);
}

TEST(Sandwich, PointwiseOrderingOnCertifiedInterval) {
  for (double p : {0.5, 1.0 / 3}) {
    const auto f = OffspringLaw::geometric(p);
    const auto sw = build_sandwich(f, 0.1);
    EXPECT_LT(sw.s0, 1.0);
    double worst = 1.0;
    for (int i = 1; i <= 1000; ++i) {
      const double s = sw.s0 + (1 - sw.s0) * i / 1000.0;
      worst = std::min({worst, f(s) - sw.minus(s), sw.plus(s) - f(s)});
    }
    EXPECT_GE(worst, -1e-12) << "p=" << p;
  }
}

TEST(Sandwich, RejectsBadEpsilon) {
  EXPECT_THROW(build_sandwich(OffspringLaw::geometric(0.5), 0.0), InputError);
  EXPECT_THROW(build_sandwich(OffspringLaw::geometric(0.5), 1.5), InputError);
}
