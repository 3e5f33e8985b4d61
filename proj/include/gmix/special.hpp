#pragma once

// Special functions for the structural-shape Gamma mixture: log-Gamma,
// digamma/trigamma, the regularized incomplete Gamma function and the
// analytic bound functions used in the density caps.

namespace gmix {

/// Euler–Mascheroni constant.
inline constexpr double kEulerGamma = 0.5772156649015329;

/// log Γ(r) for r > 0. Throws std::domain_error otherwise.
double ln_gamma(double r);

/// Remainder of Stirling's formula:
/// log Γ(r) - [(r - 1/2) log r - r + log(2π)/2].
double stirling_correction(double r);

/// ψ(r) = d/dr log Γ(r).
double digamma(double r);

/// ψ'(r).
double trigamma(double r);

/// log r - ψ(r), evaluated without cancellation at large r. Strictly
/// decreasing from +∞ (r → 0) to 0 (r → ∞).
double log_minus_digamma(double r);

/// d/dr [log r - ψ(r)] = 1/r - ψ'(r); always negative.
double log_minus_digamma_derivative(double r);

/// Regularized lower incomplete Gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete Gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Raw values of r^{r-γ}/e^{r-1} and r^{r-1/2}/e^{r-1}. For r > 1 they
/// bracket Γ(r) from below and above; for 0 < r < 1 both lie below Γ(r).
/// The caller decides which direction applies.
struct GammaBounds {
  double lower;
  double upper;
};

GammaBounds gamma_bounds(double r);

/// Same bounds on the log scale (usable where Γ(r) overflows).
GammaBounds log_gamma_bounds(double r);

/// √2 log r / √r. Throws std::domain_error for r <= 1.
double epsilon_r(double r);

/// e^t - t - 1.
double h(double t);

}  // namespace gmix
