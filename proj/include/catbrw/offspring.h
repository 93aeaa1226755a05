#pragma once

#include <vector>

namespace catbrw {

// Offspring law as a finite coefficient sequence f_k = P(xi = k). Laws with
// unbounded support are stored truncated and flagged as such.
class OffspringLaw {
 public:
  static constexpr int kDefaultDerivativeOrder = 10;

  explicit OffspringLaw(std::vector<double> coefficients, bool truncated = false, double truncated_mass = 0.0,
                        int derivative_order = kDefaultDerivativeOrder);

  // (1 - p2) + p2 s^2
  static OffspringLaw binary(double p2);
  // p / (1 - (1 - p) s), cut where the remaining tail drops below tail_tol.
  static OffspringLaw geometric(double p, double tail_tol = 1e-17);

  double operator()(double s) const noexcept;
  // f^(k)(1); throws DerivativeOrderError beyond the cached order.
  double derivative(int k) const;
  double mean() const noexcept { return derivs_[1]; }
  double second_factorial() const noexcept { return derivs_.size() > 2 ? derivs_[2] : 0.0; }
  double variance() const noexcept;

  const std::vector<double>& coefficients() const noexcept { return coeffs_; }
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool truncated() const noexcept { return truncated_; }
  double truncated_mass() const noexcept { return truncated_mass_; }
  int derivative_order() const noexcept { return static_cast<int>(derivs_.size()) - 1; }
  // f'(1) > 0 and 0 < f''(1) < infinity.
  bool satisfies_moment_conditions() const noexcept;

 private:
  std::vector<double> coeffs_;
  std::vector<double> derivs_;
  bool truncated_;
  double truncated_mass_;
};

}  // namespace catbrw
