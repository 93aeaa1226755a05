#include "catbrw/limit_laws.h"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "catbrw/errors.h"

namespace catbrw {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> convolve(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> z(x.size() + y.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) z[i + j] += x[i] * y[j];
  return z;
}

}  // namespace

std::string ModelConstants::to_text() const {
  std::string s;
  auto line = [&](const char* k, double v) { s += std::string(k) + " = " + fmt(v) + "\n"; };
  line("a", a);
  line("b2", b2);
  line("gamma", gamma);
  line("gamma_error", gamma_error);
  line("h", h);
  line("h_se", h_se);
  line("alpha", alpha);
  line("m1", m1);
  line("f2", f2);
  line("c4", c4);
  line("C", C);
  return s;
}

ModelConstants make_constants(double a, double b2, double gamma, double gamma_error, double h, double h_se,
                              double alpha, const OffspringLaw& f) {
  ModelConstants c;
  c.a = a;
  c.b2 = b2;
  c.gamma = gamma;
  c.gamma_error = gamma_error;
  c.h = h;
  c.h_se = h_se;
  c.alpha = alpha;
  c.m1 = f.mean();
  c.f2 = f.second_factorial();
  c.c4 = a * (1.0 - alpha) * gamma * h * h;
  c.C = 3.0 * c.c4 / (alpha * c.f2);
  return c;
}

double calibrate_alpha(double m1, double h) {
  if (!(h >= 0.0 && h <= 1.0)) throw InputError("escape probability must lie in [0,1]");
  if (m1 < 1.0) throw NoSolutionError("mean offspring " + std::to_string(m1) + " < 1 cannot be made critical");
  if (m1 == 1.0) return 1.0;
  return h / (m1 - 1.0 + h);
}

double yaglom_cdf(double x) {
  if (x < 0.0) return 0.0;
  return 1.0 / 3.0 - (2.0 / 3.0) * std::expm1(-2.0 * x / 3.0);
}

double yaglom_laplace(double lambda) { return 1.0 / 3.0 + (2.0 / 3.0) * 2.0 / (2.0 + 3.0 * lambda); }

double yaglom_moment(int n) {
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  return (2.0 / 3.0) * std::pow(1.5, n) * fact;
}

double survival_asymptote(double t, const ModelConstants& c) {
  if (!(t > 1.0)) throw InputError("asymptote needs t > 1");
  return c.C * std::log(t) / t;
}

double conditional_mean_asymptote(double t, const ModelConstants& c) {
  if (!(t > 1.0)) throw InputError("asymptote needs t > 1");
  const double l = std::log(t);
  return 3.0 / (c.alpha * c.f2 * c.C * c.C) * t / (l * l);
}

double first_moment_asymptote(double t, const ModelConstants& c) {
  if (!(t > 1.0)) throw InputError("asymptote needs t > 1");
  return 1.0 / (c.c4 * std::log(t));
}

Sandwich build_sandwich(const OffspringLaw& f, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("epsilon must lie in (0,1)");
  if (!f.satisfies_moment_conditions()) throw InputError("sandwich needs f'(1) > 0 and 0 < f''(1) < infinity");
  if (!f.truncated()) return Sandwich{f, f, 0.0, true};

  const auto& c = f.coefficients();
  const int deg = f.degree();
  // Smallest cutoff with 0 < E[N (N-k)^+] <= eps/3 and E[(k-N)^+] >= 1.
  int k = 1;
  double tail = 0.0;
  double r = 0.0;
  for (; k < deg; ++k) {
    tail = 0.0;
    r = 0.0;
    double below = 0.0;
    for (int i = 0; i <= deg; ++i) {
      if (i > k) {
        tail += i * static_cast<double>(i - k) * c[i];
        r += (i - k) * c[i];
      } else {
        below += (k - i) * c[i];
      }
    }
    if (tail > 0.0 && tail <= eps / 3.0 && below >= 1.0) break;
  }
  if (k >= deg)
    throw CalibrationError("no cutoff k meets E[N(N-k)^+] <= " + std::to_string(eps / 3.0) +
                           " with E[(k-N)^+] >= 1 inside the stored support (degree " + std::to_string(deg) + ")");
  const int ell = static_cast<int>(std::floor(3.0 * tail / r));
  if (ell < 3)
    throw CalibrationError("sandwich construction degenerates: ell = " + std::to_string(ell) + " < 3");
  const double b = r / ell;

  std::vector<double> capped(static_cast<std::size_t>(k) + 1, 0.0);
  for (int i = 0; i <= deg; ++i) capped[static_cast<std::size_t>(std::min(i, k))] += c[i];
  std::vector<double> jump(static_cast<std::size_t>(ell) + 1, 0.0);
  jump[0] = 1.0 - b;
  jump[static_cast<std::size_t>(ell)] = b;

  Sandwich sw{OffspringLaw(convolve(capped, {1.0 - r, r})), OffspringLaw(convolve(capped, jump)), 0.0, false};
  sw.cutoff = k;
  sw.ell = ell;
  sw.r = r;
  sw.b = b;
  sw.tail_moment = tail;

  // s0: scan at 1e-3, then bisect the last failing cell.
  auto fails = [&](double s) {
    const double v = f(s);
    return sw.minus(s) - v > 1e-13 || v - sw.plus(s) > 1e-13;
  };
  int last_bad = -1;
  for (int i = 0; i < 1000; ++i)
    if (fails(i * 1e-3)) last_bad = i;
  if (last_bad >= 0) {
    double lo = last_bad * 1e-3;
    double hi = (last_bad + 1) * 1e-3;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (fails(mid) ? lo : hi) = mid;
    }
    sw.s0 = hi;
  }
  return sw;
}

}  // namespace catbrw
