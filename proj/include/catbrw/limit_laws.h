#pragma once

#include <string>

#include "catbrw/offspring.h"

namespace catbrw {

struct ModelConstants {
  double a = 0.0;
  double b2 = 0.0;
  double gamma = 0.0;
  double gamma_error = 0.0;
  double h = 0.0;
  double h_se = 0.0;
  double alpha = 0.0;
  double m1 = 0.0;
  double f2 = 0.0;
  double c4 = 0.0;  // a (1 - alpha) gamma h^2
  double C = 0.0;   // 3 c4 / (alpha f2)

  std::string to_text() const;
};

ModelConstants make_constants(double a, double b2, double gamma, double gamma_error, double h, double h_se,
                              double alpha, const OffspringLaw& f);

// Unique alpha in (0,1] with alpha m1 + (1 - alpha)(1 - h) = 1.
double calibrate_alpha(double m1, double h);

// Atom 1/3 at zero plus an exponential of rate 2/3 with weight 2/3.
double yaglom_cdf(double x);
double yaglom_laplace(double lambda);
// (2/3)(3/2)^n n!
double yaglom_moment(int n);

double survival_asymptote(double t, const ModelConstants& c);          // C log t / t
double conditional_mean_asymptote(double t, const ModelConstants& c);  // 3 t / (alpha f2 C^2 log^2 t)
double first_moment_asymptote(double t, const ModelConstants& c);      // 1 / (c4 log t)

struct Sandwich {
  OffspringLaw minus;
  OffspringLaw plus;
  double s0 = 0.0;
  bool trivial = false;
  int cutoff = 0;
  int ell = 0;
  double r = 0.0;
  double b = 0.0;
  double tail_moment = 0.0;  // E[N (N - k)^+]
};

// Polynomial laws f_- <= f <= f_+ on (s0, 1] with equal means and bracketing variances.
Sandwich build_sandwich(const OffspringLaw& f, double eps);

}  // namespace catbrw
