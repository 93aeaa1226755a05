#include "catbrw/offspring.h"

#include <cmath>
#include <string>

#include "catbrw/errors.h"

namespace catbrw {

OffspringLaw::OffspringLaw(std::vector<double> coefficients, bool truncated, double truncated_mass,
                           int derivative_order)
    : coeffs_(std::move(coefficients)), truncated_(truncated), truncated_mass_(truncated_mass) {
  if (coeffs_.empty()) throw InputError("offspring law needs at least one coefficient");
  if (derivative_order < 2) throw InputError("derivative order must be at least 2");
  double total = 0.0;
  for (double c : coeffs_) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("offspring coefficients must be finite and nonnegative");
    total += c;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("offspring coefficients sum to " + std::to_string(total));
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();

  derivs_.assign(static_cast<std::size_t>(derivative_order) + 1, 0.0);
  for (std::size_t j = 0; j < coeffs_.size(); ++j) {
    double falling = 1.0;
    for (int k = 0; k <= derivative_order && static_cast<std::size_t>(k) <= j; ++k) {
      derivs_[static_cast<std::size_t>(k)] += coeffs_[j] * falling;
      falling *= static_cast<double>(j - static_cast<std::size_t>(k));
    }
  }
}

OffspringLaw OffspringLaw::binary(double p2) {
  if (!(p2 >= 0.0 && p2 <= 1.0)) throw InputError("binary law needs p2 in [0,1]");
  return OffspringLaw({1.0 - p2, 0.0, p2});
}

OffspringLaw OffspringLaw::geometric(double p, double tail_tol) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("geometric law needs p in (0,1)");
  std::vector<double> c;
  double tail = 1.0;  // P(xi >= k)
  double term = p;
  while (tail > tail_tol) {
    c.push_back(term);
    tail *= 1.0 - p;
    term *= 1.0 - p;
  }
  double sum = 0.0;
  for (double v : c) sum += v;
  for (double& v : c) v /= sum;
  return OffspringLaw(std::move(c), true, tail);
}

double OffspringLaw::operator()(double s) const noexcept {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double OffspringLaw::derivative(int k) const {
  if (k < 0 || k > derivative_order())
    throw DerivativeOrderError("f^(" + std::to_string(k) + ")(1) requested; cached order is " +
                               std::to_string(derivative_order()));
  return derivs_[static_cast<std::size_t>(k)];
}

double OffspringLaw::variance() const noexcept { return second_factorial() + mean() - mean() * mean(); }

bool OffspringLaw::satisfies_moment_conditions() const noexcept {
  return mean() > 0.0 && second_factorial() > 0.0 && std::isfinite(second_factorial());
}

}  // namespace catbrw
