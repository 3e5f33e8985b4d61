#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "gmix/special.hpp"
#include "oracles.hpp"

using namespace gmix;

namespace {

// |lnΓ| grows past 4000 on the tested range, where a double cannot hold an
// absolute 1e-12; allow a few ulps of the value there.
double lgamma_tolerance(double v) { return 1e-12 + 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(v); }

}  // namespace

TEST_CASE("Euler-Mascheroni constant") {
  CHECK(kEulerGamma > 0.577215);
  CHECK(kEulerGamma < 0.577216);
}

TEST_CASE("ln_gamma known values") {
  CHECK(std::fabs(ln_gamma(1.0)) <= 1e-12);
  CHECK(std::fabs(ln_gamma(2.0)) <= 1e-12);
  CHECK(std::fabs(ln_gamma(5.0) - std::log(24.0)) <= 1e-12);
  CHECK(std::fabs(ln_gamma(0.5) - 0.5 * std::log(std::numbers::pi)) <= 1e-12);
  CHECK(std::fabs(ln_gamma(1e-6) - 13.815509980749431669) <= 1e-12);
  CHECK(std::fabs(ln_gamma(1e8) - 1742068066.1038347093) <= lgamma_tolerance(1.742e9));
}

TEST_CASE("ln_gamma agrees with the C library over [1e-6, 1e8]") {
  for (double e = -6.0; e <= 8.0; e += 0.01) {
    const double r = std::pow(10.0, e);
    const double ref = std::lgamma(r);
    CHECK_MESSAGE(std::fabs(ln_gamma(r) - ref) <= lgamma_tolerance(ref) + 2e-14, "r=" << r);
  }
}

TEST_CASE("ln_gamma recurrence") {
  for (double r = 0.1; r <= 100.0; r += 0.037) {
    CHECK(std::fabs(ln_gamma(r + 1.0) - ln_gamma(r) - std::log(r)) <= 1e-10);
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(ln_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(ln_gamma(-1.0), std::domain_error);
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_bounds(-2.0), std::domain_error);
  CHECK_THROWS_AS(epsilon_r(1.0), std::domain_error);
  CHECK_THROWS_AS(epsilon_r(0.5), std::domain_error);
}

TEST_CASE("digamma identities") {
  CHECK(std::fabs(digamma(1.0) + kEulerGamma) <= 1e-12);
  CHECK(std::fabs(digamma(2.0) - (1.0 - kEulerGamma)) <= 1e-12);
  CHECK(std::fabs(digamma(0.5) - (-kEulerGamma - 2.0 * std::log(2.0))) <= 1e-12);
  // ψ(1e-6) ≈ -1e6; one ulp there is 1.2e-10.
  CHECK(std::fabs(digamma(1e-6) - -1000000.57721401996867) <= 5e-10);
  CHECK(std::fabs(digamma(1e8) - 18.420680738952365464) <= 1e-12);
}

TEST_CASE("digamma matches finite differences of ln_gamma") {
  const double fd10 = oracle::central_difference([](double r) { return ln_gamma(r); }, 10.0, 1e-5);
  CHECK(std::fabs(digamma(10.0) - fd10) <= 1e-6);
  for (double r = 0.1; r <= 100.0; r += 0.037) {
    const double h = 1e-5 * std::max(1.0, r);
    const double fd = oracle::central_difference([](double x) { return ln_gamma(x); }, r, std::min(h, 0.5 * r));
    CHECK_MESSAGE(std::fabs(digamma(r) - fd) <= 1e-6, "r=" << r);
  }
}

TEST_CASE("trigamma and log-minus-digamma derivatives") {
  for (double r : {1e-4, 0.3, 1.0, 7.5, 9.999, 10.0, 42.0, 1e4}) {
    const double h = 1e-4 * r;
    const double fd = oracle::central_difference([](double x) { return digamma(x); }, r, h);
    CHECK(trigamma(r) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(log_minus_digamma(r) == doctest::Approx(std::log(r) - digamma(r)).epsilon(1e-12));
    const double fd2 = oracle::central_difference([](double x) { return log_minus_digamma(x); }, r, h);
    CHECK(log_minus_digamma_derivative(r) == doctest::Approx(fd2).epsilon(1e-5));
    CHECK(log_minus_digamma_derivative(r) < 0.0);
  }
  CHECK(std::fabs(trigamma(1.0) - std::numbers::pi * std::numbers::pi / 6.0) <= 1e-12);
  // Strictly decreasing towards 0.
  double prev = log_minus_digamma(1e-6);
  for (double e = -5.9; e <= 8.0; e += 0.1) {
    const double v = log_minus_digamma(std::pow(10.0, e));
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
}

TEST_CASE("regularized incomplete gamma") {
  // Exponential: P(1, x) = 1 - e^{-x}.
  for (double x : {0.01, 0.5, 1.0, 3.0, 20.0}) {
    CHECK(gamma_p(1.0, x) == doctest::Approx(-std::expm1(-x)).epsilon(1e-13));
    CHECK(gamma_p(1.0, x) + gamma_q(1.0, x) == doctest::Approx(1.0).epsilon(1e-14));
  }
  // P(1/2, x) = erf(√x).
  for (double x : {1e-4, 0.2, 1.4, 9.0}) CHECK(gamma_p(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
  // Quadrature of the Gamma(3) density.
  const double a = 3.0;
  const double x = 2.2;
  const double ref = oracle::integrate([&](double t) { return std::pow(t, a - 1.0) * std::exp(-t) / 2.0; }, 0.0, x);
  CHECK(gamma_p(a, x) == doctest::Approx(ref).epsilon(1e-10));
  CHECK(gamma_p(2.0, 0.0) == 0.0);
}

TEST_CASE("gamma_bounds examples") {
  const GammaBounds b2 = gamma_bounds(2.0);
  CHECK(b2.lower == doctest::Approx(0.98629374829862605).epsilon(1e-13));
  CHECK(b2.upper == doctest::Approx(1.0405201900457778).epsilon(1e-13));
  CHECK(b2.lower < 1.0);
  CHECK(b2.upper > 1.0);

  const GammaBounds b1 = gamma_bounds(1.0 + 1e-9);
  CHECK(b1.lower == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(b1.upper == doctest::Approx(1.0).epsilon(1e-8));

  const GammaBounds bh = gamma_bounds(0.5);
  CHECK(bh.lower == doctest::Approx(1.7393679853296535).epsilon(1e-13));
  CHECK(bh.upper == doctest::Approx(1.6487212707001281).epsilon(1e-13));
  CHECK(std::exp(ln_gamma(0.5)) > bh.lower);
  CHECK(std::exp(ln_gamma(0.5)) > bh.upper);
}

TEST_CASE("gamma_bounds bracket Gamma above 1 and sit below it under 1") {
  for (double r : {1.0001, 1.5, 2.0, 5.0, 20.0, 100.0, 1e4}) {
    const GammaBounds lb = log_gamma_bounds(r);
    CHECK_MESSAGE(lb.lower < ln_gamma(r), "r=" << r);
    CHECK_MESSAGE(ln_gamma(r) < lb.upper, "r=" << r);
  }
  for (double r : {0.01, 0.1, 0.5, 0.9}) {
    const GammaBounds b = gamma_bounds(r);
    CHECK(b.lower < std::exp(ln_gamma(r)));
    CHECK(b.upper < std::exp(ln_gamma(r)));
  }
}

TEST_CASE("epsilon_r") {
  CHECK(epsilon_r(std::exp(2.0)) == doctest::Approx(1.0405201900457778).epsilon(1e-13));
  CHECK(epsilon_r(100.0) == doctest::Approx(0.65126941340605874).epsilon(1e-13));
  CHECK(epsilon_r(1e6) == doctest::Approx(0.019538082402181762).epsilon(1e-13));
  for (double r = 20.001; r < 1e7; r *= 1.3) {
    CHECK(epsilon_r(r) > 0.0);
    CHECK(epsilon_r(r) < 1.0);
  }
}

TEST_CASE("h(t)") {
  CHECK(h(0.0) == 0.0);
  CHECK(h(1.0) == doctest::Approx(std::numbers::e - 2.0).epsilon(1e-15));
  CHECK(h(-0.5) == doctest::Approx(0.10653065971263342).epsilon(1e-14));
  CHECK(h(-0.5) > 0.25 / 3.0);
  CHECK(h(1e-9) > 0.0);
  CHECK(h(-1e-9) > 0.0);
}

TEST_CASE("h(t) >= t0^2/3 off the band |t| < t0") {
  for (double t0 : {0.1, 0.5, 0.99}) {
    int violations = 0;
    for (int k = 0; k < 10000; ++k) {
      const double t = -10.0 + 20.0 * k / 9999.0;
      if (std::fabs(t) >= t0 && h(t) < t0 * t0 / 3.0) ++violations;
    }
    CHECK(violations == 0);
  }
}
