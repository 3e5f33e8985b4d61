#include "gmix/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gmix {
namespace {

constexpr double kAsymptoticThreshold = 10.0;
constexpr double kHalfLogTwoPi = 0.91893853320467274178;

void require_positive(double r, const char* fn) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::domain_error(std::string(fn) + ": argument must be positive and finite, got " +
                            std::to_string(r));
  }
}

// Σ B_{2k} / (2k(2k-1) z^{2k-1}), valid for z >= 10.
double stirling_series(double z) {
  const double z2 = 1.0 / (z * z);
  double s = -3617.0 / 122400.0;
  s = s * z2 + 1.0 / 156.0;
  s = s * z2 - 691.0 / 360360.0;
  s = s * z2 + 1.0 / 1188.0;
  s = s * z2 - 1.0 / 1680.0;
  s = s * z2 + 1.0 / 1260.0;
  s = s * z2 - 1.0 / 360.0;
  s = s * z2 + 1.0 / 12.0;
  return s / z;
}

// log z - ψ(z) for z >= 10.
double log_minus_digamma_series(double z) {
  const double z2 = 1.0 / (z * z);
  double s = 1.0 / 12.0;
  s = s * z2 - 691.0 / 32760.0;
  s = s * z2 + 1.0 / 132.0;
  s = s * z2 - 1.0 / 240.0;
  s = s * z2 + 1.0 / 252.0;
  s = s * z2 - 1.0 / 120.0;
  s = s * z2 + 1.0 / 12.0;
  return 0.5 / z + s * z2;
}

// d/dz of log_minus_digamma_series.
double log_minus_digamma_series_derivative(double z) {
  const double iz = 1.0 / z;
  const double z2 = iz * iz;
  double s = -14.0 / 12.0;
  s = s * z2 + 691.0 * 12.0 / 32760.0;
  s = s * z2 - 10.0 / 132.0;
  s = s * z2 + 1.0 / 30.0;
  s = s * z2 - 1.0 / 42.0;
  s = s * z2 + 1.0 / 30.0;
  s = s * z2 * z2;
  return -0.5 * z2 - z2 * iz / 6.0 + s * iz;
}

double trigamma_series(double z) {
  const double iz = 1.0 / z;
  const double z2 = iz * iz;
  double s = 7.0 / 6.0;
  s = s * z2 - 691.0 / 2730.0;
  s = s * z2 + 5.0 / 66.0;
  s = s * z2 - 1.0 / 30.0;
  s = s * z2 + 1.0 / 42.0;
  s = s * z2 - 1.0 / 30.0;
  s = s * z2 + 1.0 / 6.0;
  return iz + 0.5 * z2 + s * z2 * iz;
}

}  // namespace

double stirling_correction(double r) {
  require_positive(r, "stirling_correction");
  if (r >= kAsymptoticThreshold) return stirling_series(r);
  return ln_gamma(r) - ((r - 0.5) * std::log(r) - r + kHalfLogTwoPi);
}

double ln_gamma(double r) {
  require_positive(r, "ln_gamma");
  if (r >= kAsymptoticThreshold) {
    return (r - 0.5) * std::log(r) - r + kHalfLogTwoPi + stirling_series(r);
  }
  // Shift up to the asymptotic region: Γ(r) = Γ(r + k) / (r (r+1) ... (r+k-1)).
  double z = r;
  double product = 1.0;
  while (z < kAsymptoticThreshold) {
    product *= z;
    z += 1.0;
  }
  return (z - 0.5) * std::log(z) - z + kHalfLogTwoPi + stirling_series(z) - std::log(product);
}

double digamma(double r) {
  require_positive(r, "digamma");
  double z = r;
  double shift = 0.0;
  while (z < kAsymptoticThreshold) {
    shift += 1.0 / z;
    z += 1.0;
  }
  return std::log(z) - log_minus_digamma_series(z) - shift;
}

double trigamma(double r) {
  require_positive(r, "trigamma");
  double z = r;
  double shift = 0.0;
  while (z < kAsymptoticThreshold) {
    shift += 1.0 / (z * z);
    z += 1.0;
  }
  return trigamma_series(z) + shift;
}

double log_minus_digamma(double r) {
  require_positive(r, "log_minus_digamma");
  if (r >= kAsymptoticThreshold) return log_minus_digamma_series(r);
  double z = r;
  double shift = 0.0;
  while (z < kAsymptoticThreshold) {
    shift += 1.0 / z;
    z += 1.0;
  }
  return std::log(r / z) + log_minus_digamma_series(z) + shift;
}

double log_minus_digamma_derivative(double r) {
  require_positive(r, "log_minus_digamma_derivative");
  if (r >= kAsymptoticThreshold) return log_minus_digamma_series_derivative(r);
  return 1.0 / r - trigamma(r);
}

namespace {

constexpr int kMaxIncompleteIter = 100000;
constexpr double kIncompleteEps = 1e-16;

// Series for P(a, x), x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIncompleteIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kIncompleteEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - ln_gamma(a));
}

// Lentz continued fraction for Q(a, x), x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kIncompleteEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double f = d;
  for (int i = 1; i < kMaxIncompleteIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::fabs(delta - 1.0) < kIncompleteEps) break;
  }
  return std::exp(-x + a * std::log(x) - ln_gamma(a)) * f;
}

void check_incomplete_args(double a, double x) {
  require_positive(a, "incomplete gamma");
  if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: x must be nonnegative");
}

}  // namespace

double gamma_p(double a, double x) {
  check_incomplete_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_incomplete_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

GammaBounds log_gamma_bounds(double r) {
  require_positive(r, "gamma_bounds");
  const double lr = std::log(r);
  return {(r - kEulerGamma) * lr - (r - 1.0), (r - 0.5) * lr - (r - 1.0)};
}

GammaBounds gamma_bounds(double r) {
  const GammaBounds lb = log_gamma_bounds(r);
  return {std::exp(lb.lower), std::exp(lb.upper)};
}

double epsilon_r(double r) {
  if (!(r > 1.0)) throw std::domain_error("epsilon_r: requires r > 1");
  return std::numbers::sqrt2 * std::log(r) / std::sqrt(r);
}

double h(double t) { return std::expm1(t) - t; }

}  // namespace gmix
