#pragma once

#include <cmath>
#include <vector>

#include "catbrw/kernels.h"
#include "catbrw/limit_laws.h"
#include "catbrw/moments.h"
#include "catbrw/volterra.h"
#include "catbrw/walk.h"

namespace catbrw::testing {

// Default d=4 model calibrated once per test binary with a reduced excursion count.
struct DefaultModel {
  WalkSpec walk = WalkSpec::simple(4, 1.0);
  OffspringLaw f = OffspringLaw::binary(1.0);
  GammaEstimate gamma;
  ReturnTable rt;
  ModelConstants constants;
  KernelSet ks;
  SolutionTable q;
  std::vector<SolutionTable> P;
};

inline const DefaultModel& default_model() {
  static const DefaultModel m = [] {
    DefaultModel d;
    d.gamma = gamma_d(d.walk);
    ReturnTableOptions o;
    o.gamma = d.gamma.value;
    d.rt = tabulate_return_cdf(d.walk, geometric_grid(0.1, 1.05, 100.0), 200000, 1000.0, 7, o);
    const double alpha = calibrate_alpha(d.f.mean(), d.rt.h);
    d.constants = make_constants(1.0, 1.0, d.gamma.value, d.gamma.error, d.rt.h, d.rt.h_raw_se, alpha, d.f);
    KernelOptions ko;
    ko.gamma = d.gamma.value;
    d.ks = build_kernel_set(alpha, d.f, d.rt.h, d.rt.g2, ko);
    d.q = solve_q(d.ks, d.f, 0.0);
    d.P = compute_moments(d.ks, d.f, 3);
    return d;
  }();
  return m;
}

// (e^-x I0(x))^d with x = a t / d: the simple walk factorises over coordinates.
inline double simple_walk_return_bessel(int d, double a, double t) {
  const double x = a * t / d;
  return std::pow(std::exp(-x) * std::cyl_bessel_i(0.0, x), d);
}

}  // namespace catbrw::testing
