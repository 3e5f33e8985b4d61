#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gmix {

/// Finite mixing distribution G = Σ α_j {θ_j} over component scales.
class MixingDistribution {
 public:
  /// Throws std::invalid_argument unless sizes match, m >= 1, every
  /// weight lies in [0, 1], the weights sum to 1 within 1e-12 and every
  /// scale is positive and finite.
  MixingDistribution(std::vector<double> weights, std::vector<double> scales);

  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& scales() const { return scales_; }
  double weight(std::size_t j) const { return weights_[j]; }
  double scale(std::size_t j) const { return scales_[j]; }

  /// Point mass at a single scale.
  static MixingDistribution point_mass(double scale);

  bool operator==(const MixingDistribution&) const = default;

 private:
  std::vector<double> weights_;
  std::vector<double> scales_;
};

/// Structural shape r shared by all components plus a mixing distribution.
class MixtureModel {
 public:
  MixtureModel(double shape, MixingDistribution mixing);
  MixtureModel(double shape, std::vector<double> weights, std::vector<double> scales);

  double shape() const { return shape_; }
  const MixingDistribution& mixing() const { return mixing_; }
  std::size_t order() const { return mixing_.size(); }
  double weight(std::size_t j) const { return mixing_.weight(j); }
  double scale(std::size_t j) const { return mixing_.scale(j); }

  bool operator==(const MixtureModel&) const = default;

 private:
  double shape_;
  MixingDistribution mixing_;
};

/// Positive observations with the cached log transform y_i = log x_i.
class Dataset {
 public:
  /// Throws std::invalid_argument when empty or any x_i is not a positive
  /// finite number.
  explicit Dataset(std::vector<double> x);

  std::size_t size() const { return x_.size(); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

/// log f(x; r, θ) of the Gamma density with shape r and scale θ.
double gamma_log_pdf(double x, double r, double theta);

/// log g(y; r, θ), the density of Y = log X for X ~ Gamma(r, θ).
double loggamma_log_pdf(double y, double r, double theta);

/// log Σ_j α_j g(y; r, θ_j) by log-sum-exp. Zero-weight components are skipped.
double mixture_log_density(double y, const MixtureModel& model);

/// ℓ_n(r, G) = Σ_i log g(y_i; r, G).
double log_likelihood(const Dataset& data, const MixtureModel& model);

/// Penalised objective ℓ_n + ε Σ_j log α_j. Returns -infinity when
/// eps > 0 and some weight is zero (a degenerate point).
double modified_log_likelihood(const Dataset& data, const MixtureModel& model, double eps);

/// ε Σ_j log α_j, or -infinity when a weight is zero and eps > 0.
double weight_penalty(std::span<const double> weights, double eps);

/// |arctan r_1 - arctan r_2| + ∫_0^∞ |G_1(θ) - G_2(θ)| e^{-θ} dθ, evaluated
/// exactly over the merged support.
double d_kw(const MixtureModel& a, const MixtureModel& b);

/// E[e^{tY}] = Σ α_j θ_j^t Γ(r + t)/Γ(r). Requires t > -r.
double mgf_log_y(const MixtureModel& model, double t);

/// Largest mixture density value over the component peaks y = log(r θ_j).
/// Exact supremum for m = 1; never exceeds exp(γ log r).
double density_sup_bound(const MixtureModel& model);

/// max over u in grid of (1/n) #{i : |y_i - u| < eps}.
double empirical_interval_bound(const Dataset& data, double eps, std::span<const double> grid);

/// Flat text record `m r alpha_1 .. alpha_m theta_1 .. theta_m` with 17
/// significant digits.
std::string to_record(const MixtureModel& model);

/// Inverse of to_record. Throws std::invalid_argument on malformed input.
MixtureModel parse_record(std::string_view text);

}  // namespace gmix
