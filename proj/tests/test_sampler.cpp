#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "gmix/model.hpp"
#include "gmix/sampler.hpp"
#include "gmix/simulation.hpp"
#include "oracles.hpp"

using namespace gmix;

namespace {

struct Moments {
  double mean;
  double var;
};

Moments moments(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(v.size() - 1)};
}

// Kolmogorov-Smirnov distance against a CDF tabulated on the log scale by
// panel-wise quadrature of the log-Gamma density.
double ks_against_quadrature(std::vector<double> x, double r, double theta) {
  std::vector<double> y;
  for (double v : x) y.push_back(std::log(v));
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(y.size());
  auto dens = [&](double t) { return std::exp(loggamma_log_pdf(t, r, theta)); };
  double lo = std::log(r * theta) - 60.0 / std::min(r, 1.0);
  double cdf = oracle::integrate(dens, lo - 200.0, lo, 1e-14);
  double d = 0.0;
  std::size_t idx = 0;
  const double step = 0.01;
  const double hi = std::log(r * theta) + 10.0;
  for (double t = lo; t < hi; t += step) {
    cdf += oracle::integrate(dens, t, t + step, 1e-14);
    while (idx < y.size() && y[idx] <= t + step) ++idx;
    d = std::max(d, std::fabs(static_cast<double>(idx) / n - cdf));
  }
  return d;
}

}  // namespace

TEST_CASE("generator determinism and streams") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const auto va = a.next();
    CHECK(va == b.next());
    differs = differs || va != c.next();
  }
  CHECK(differs);

  // Child k is a pure function of (seed, k).
  const Rng master(9);
  Rng k3_alone = master.child(3);
  Rng k2 = master.child(2);
  for (int i = 0; i < 50; ++i) k2.next();
  Rng k3_after = master.child(3);
  for (int i = 0; i < 100; ++i) CHECK(k3_alone.next() == k3_after.next());
  CHECK(master.child(2).next() != master.child(3).next());

  Rng s(5);
  for (int i = 0; i < 7; ++i) s.next();
  Rng restored = Rng::deserialize(s.serialize());
  for (int i = 0; i < 20; ++i) CHECK(restored.next() == s.next());
  CHECK_THROWS_AS(Rng::deserialize("garbage"), std::invalid_argument);
}

TEST_CASE("frozen stream values") {
  // Datasets are reproducible across platforms only while these hold.
  Rng rng(2024);
  CHECK(rng.next() == 1660426732374412391ULL);
  CHECK(rng.next() == 9226705530074782627ULL);
  CHECK(Rng(2024).child(5).next() == 11739070981541380784ULL);
  CHECK(Rng(1).uniform() == 0.54385416636091066);
  CHECK(sample_gamma(rng, 0.5, 1.0) == 0.14033014184656961);
}

TEST_CASE("uniform, below and normal") {
  Rng rng(3);
  std::vector<double> z;
  std::vector<int> counts(5, 0);
  for (int k = 0; k < 200000; ++k) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    ++counts[rng.below(5)];
    z.push_back(rng.normal());
  }
  for (int c : counts) CHECK(std::fabs(c - 40000.0) < 4.0 * std::sqrt(200000 * 0.2 * 0.8));
  const Moments m = moments(z);
  CHECK(std::fabs(m.mean) < 4.0 / std::sqrt(200000.0));
  CHECK(std::fabs(m.var - 1.0) < 4.0 * std::sqrt(2.0 / 200000.0));
}

TEST_CASE("sample_gamma moments") {
  Rng rng(100);
  const std::size_t n = 1000000;
  std::vector<double> x(n);
  for (double& v : x) v = sample_gamma(rng, 5.0, 2.0);
  CHECK(std::fabs(moments(x).mean - 10.0) < 3.0 * std::sqrt(20.0 / n));

  for (double& v : x) v = sample_gamma(rng, 0.5, 1.0);
  // Var(s^2) ≈ (μ4 - σ^4)/n with μ4 = 3 r (r + 2) θ^4.
  const double sd_var = std::sqrt((3.0 * 0.5 * 2.5 - 0.25) / n);
  CHECK(std::fabs(moments(x).var - 0.5) < 4.0 * sd_var);

  CHECK_THROWS_AS(sample_gamma(rng, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(sample_gamma(rng, 1.0, -1.0), std::domain_error);
}

TEST_CASE("sample_gamma Kolmogorov-Smirnov") {
  const std::size_t n = 100000;
  for (auto [r, theta] : {std::pair{2.5, 1.5}, std::pair{0.5, 1.0}, std::pair{30.0, 0.2}}) {
    Rng rng(200 + static_cast<std::uint64_t>(r * 10));
    std::vector<double> x(n);
    for (double& v : x) v = sample_gamma(rng, r, theta);
    CHECK_MESSAGE(ks_against_quadrature(x, r, theta) < 1.63 / std::sqrt(static_cast<double>(n)), "r=" << r);
  }
}

TEST_CASE("tiny shapes stay positive and finite") {
  Rng rng(300);
  for (int k = 0; k < 100000; ++k) {
    const double v = sample_gamma(rng, 0.01, 1.0);
    REQUIRE(v > 0.0);
    REQUIRE(std::isfinite(v));
    REQUIRE(std::isfinite(std::log(v)));
  }
}

TEST_CASE("sample_mixture") {
  Rng a(7), b(7);
  const MixtureModel m2 = model_two(10.0);
  const Dataset da = sample_mixture(a, m2, 500);
  const Dataset db = sample_mixture(b, m2, 500);
  CHECK(da.x() == db.x());
  CHECK(da.y() == db.y());
  for (std::size_t i = 0; i < da.size(); ++i) CHECK(da.y()[i] == std::log(da.x()[i]));
  CHECK_THROWS_AS(sample_mixture(a, m2, 0), std::invalid_argument);

  // Component frequencies.
  Rng rng(8);
  const std::size_t n = 1000000;
  const LabelledSample s = sample_mixture_labelled(rng, m2, n);
  std::vector<double> freq(3, 0.0);
  for (std::size_t l : s.label) freq[l] += 1.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double p = m2.weight(j);
    CHECK(std::fabs(freq[j] / n - p) < 3.0 * std::sqrt(p * (1.0 - p) / n));
  }

  // m = 1 reduces to a single Gamma.
  Rng rs(9);
  const Dataset single = sample_mixture(rs, MixtureModel(5.0, {1.0}, {2.0}), 200000);
  CHECK(std::fabs(moments(single.x()).mean - 10.0) < 4.0 * std::sqrt(20.0 / 200000.0));
}

TEST_CASE("empirical MGF of log draws") {
  Rng rng(10);
  const MixtureModel m = model_one(5.0);
  const std::size_t n = 1000000;
  const Dataset d = sample_mixture(rng, m, n);
  for (double t : {-0.2, 0.5, 1.0}) {
    std::vector<double> v;
    v.reserve(n);
    for (double y : d.y()) v.push_back(std::exp(t * y));
    const Moments mo = moments(v);
    CHECK_MESSAGE(std::fabs(mo.mean - mgf_log_y(m, t)) < 3.0 * std::sqrt(mo.var / n), "t=" << t);
  }
}

TEST_CASE("dirichlet") {
  Rng rng(11);
  std::vector<double> mean(3, 0.0);
  for (int k = 0; k < 20000; ++k) {
    const auto w = sample_dirichlet(rng, {2.0, 3.0, 5.0});
    CHECK(w[0] + w[1] + w[2] == doctest::Approx(1.0).epsilon(1e-14));
    for (int j = 0; j < 3; ++j) mean[j] += w[j] / 20000.0;
  }
  CHECK(mean[0] == doctest::Approx(0.2).epsilon(0.02));
  CHECK(mean[2] == doctest::Approx(0.5).epsilon(0.02));
}
