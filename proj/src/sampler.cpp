#include "gmix/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gmix {
namespace {

constexpr unsigned __int128 kPcgMultiplier =
    (static_cast<unsigned __int128>(0x2360ED051FC65DA4ULL) << 64) | 0x4385DF649FCCF645ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

unsigned __int128 make128(std::uint64_t hi, std::uint64_t lo) {
  return (static_cast<unsigned __int128>(hi) << 64) | lo;
}

// Underflow guard for boosted draws: y = log x must stay finite.
constexpr double kMinVariate = 1e-300;

double marsaglia_tsang(Rng& rng, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z = 0.0;
    double v = 0.0;
    do {
      z = rng.normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2) return d * v;
    if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ 0xD1B54A32D192ED03ULL);
  const std::uint64_t c = splitmix64(stream + 0x8CB92BA72F3D8DD7ULL);
  const std::uint64_t d = splitmix64(c ^ seed);
  inc_ = make128(c, d) | 1u;
  state_ = 0;
  next();
  state_ += make128(a, b);
  next();
}

std::uint64_t Rng::next() {
  state_ = state_ * kPcgMultiplier + inc_;
  const auto hi = static_cast<std::uint64_t>(state_ >> 64);
  const auto lo = static_cast<std::uint64_t>(state_);
  const std::uint64_t xored = hi ^ lo;
  const unsigned rot = static_cast<unsigned>(state_ >> 122);
  return (xored >> rot) | (xored << ((64u - rot) & 63u));
}

double Rng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  // Marsaglia polar method; the spare value is discarded to keep the
  // state a pure counter of draws.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  // Lemire's nearly divisionless method.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

Rng Rng::child(std::uint64_t index) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream_)) ^ 0xA0761D6478BD642FULL, index);
}

std::string Rng::serialize() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%016llx%016llx:%016llx%016llx:%016llx:%016llx",
                static_cast<unsigned long long>(state_ >> 64), static_cast<unsigned long long>(state_),
                static_cast<unsigned long long>(inc_ >> 64), static_cast<unsigned long long>(inc_),
                static_cast<unsigned long long>(seed_), static_cast<unsigned long long>(stream_));
  return buf;
}

Rng Rng::deserialize(const std::string& text) {
  unsigned long long s_hi = 0, s_lo = 0, i_hi = 0, i_lo = 0, seed = 0, stream = 0;
  if (std::sscanf(text.c_str(), "%16llx%16llx:%16llx%16llx:%16llx:%16llx", &s_hi, &s_lo, &i_hi, &i_lo, &seed,
                  &stream) != 6) {
    throw std::invalid_argument("Rng::deserialize: malformed state");
  }
  Rng rng;
  rng.state_ = make128(s_hi, s_lo);
  rng.inc_ = make128(i_hi, i_lo);
  rng.seed_ = seed;
  rng.stream_ = stream;
  return rng;
}

double sample_gamma(Rng& rng, double r, double theta) {
  if (!(r > 0.0) || !(theta > 0.0) || !std::isfinite(r) || !std::isfinite(theta)) {
    throw std::domain_error("sample_gamma: shape and scale must be positive");
  }
  if (r >= 1.0) return theta * marsaglia_tsang(rng, r);
  // Boost: X_r = X_{r+1} U^{1/r}.
  for (;;) {
    const double boosted = marsaglia_tsang(rng, r + 1.0);
    const double x = boosted * std::exp(std::log(rng.uniform()) / r);
    if (x > kMinVariate) return theta * x;
  }
}

namespace {

std::size_t pick_component(Rng& rng, const MixtureModel& model) {
  const double u = rng.uniform();
  double acc = 0.0;
  const std::size_t m = model.order();
  for (std::size_t j = 0; j + 1 < m; ++j) {
    acc += model.weight(j);
    if (u < acc) return j;
  }
  // Rounding leftovers go to the last component with positive weight.
  std::size_t last = m - 1;
  while (last > 0 && model.weight(last) == 0.0) --last;
  return last;
}

}  // namespace

LabelledSample sample_mixture_labelled(Rng& rng, const MixtureModel& model, std::size_t n) {
  LabelledSample out;
  out.x.reserve(n);
  out.label.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = pick_component(rng, model);
    out.label.push_back(j);
    out.x.push_back(sample_gamma(rng, model.shape(), model.scale(j)));
  }
  return out;
}

Dataset sample_mixture(Rng& rng, const MixtureModel& model, std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample_mixture: n must be positive");
  return Dataset(sample_mixture_labelled(rng, model, n).x);
}

std::vector<double> sample_dirichlet(Rng& rng, const std::vector<double>& concentration) {
  std::vector<double> out;
  out.reserve(concentration.size());
  double total = 0.0;
  for (double a : concentration) {
    out.push_back(sample_gamma(rng, a, 1.0));
    total += out.back();
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace gmix
