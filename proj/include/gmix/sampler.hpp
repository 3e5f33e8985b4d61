#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmix/model.hpp"

namespace gmix {

/// PCG-XSL-RR 128/64 generator. Streams are a pure function of
/// (seed, stream), so child generators for replication k never depend on
/// whether replication k-1 ran.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  std::uint64_t below(std::uint64_t bound);

  /// Child generator derived from this generator's seed and an index.
  Rng child(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

  /// Hex encoding of the full generator state.
  std::string serialize() const;
  static Rng deserialize(const std::string& text);

 private:
  Rng() = default;
  unsigned __int128 state_ = 0;
  unsigned __int128 inc_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
};

/// One variate from Gamma(shape r, scale θ).
double sample_gamma(Rng& rng, double r, double theta);

/// n draws from the mixture: pick component j with probability α_j, then
/// draw from Gamma(r, θ_j).
Dataset sample_mixture(Rng& rng, const MixtureModel& model, std::size_t n);

/// Component labels alongside the draws (used by frequency checks).
struct LabelledSample {
  std::vector<double> x;
  std::vector<std::size_t> label;
};
LabelledSample sample_mixture_labelled(Rng& rng, const MixtureModel& model, std::size_t n);

/// Dirichlet(concentration) draw.
std::vector<double> sample_dirichlet(Rng& rng, const std::vector<double>& concentration);

}  // namespace gmix
