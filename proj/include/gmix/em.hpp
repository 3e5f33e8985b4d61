#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmix/model.hpp"
#include "gmix/sampler.hpp"

namespace gmix {

struct EMConfig {
  double eps_penalty = 0.001;
  double tol = 1e-6;
  int max_iter = 20000;
  double r_min = 1e-6;
  double r_max = 1e6;
  int n_perturbed = 10;
  int n_random = 19;
  double perturb_scale = 0.1;
  /// Data-mode protocol: size of the first random batch.
  int n_initial_random = 50;

  /// Throws std::invalid_argument when the fields are inconsistent.
  void validate() const;
};

/// Row-major n x m matrix of component responsibilities.
class Responsibilities {
 public:
  Responsibilities() = default;
  Responsibilities(std::size_t n, std::size_t m) : n_(n), m_(m), w_(n * m, 0.0) {}

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return m_; }
  double& operator()(std::size_t i, std::size_t j) { return w_[i * m_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * m_ + j]; }
  std::span<const double> row(std::size_t i) const { return {w_.data() + i * m_, m_}; }

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> w_;
};

enum class StartKind { truth, perturbed, random };

const char* to_string(StartKind kind);

struct EMState {
  MixtureModel model;
  Responsibilities responsibilities;
  double objective = 0.0;       ///< modified log-likelihood at `model`
  double log_likelihood = 0.0;  ///< unpenalised ℓ_n at `model`
  int iterations = 0;
  bool converged = false;
  StartKind initial_kind = StartKind::random;
  /// Largest single-iteration decrease of the objective (0 when monotone).
  double max_descent = 0.0;
  /// The r update hit r_min or r_max at least once.
  bool shape_clamped = false;
  /// The r update met s = 0 (degenerate data) at least once.
  bool degenerate = false;
};

/// JSON record of the state (model record, objective, iterations, converged,
/// initial kind). Responsibilities are not serialised.
std::string to_json(const EMState& state);

/// Thrown when the objective becomes non-finite; carries the last state.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, EMState state)
      : std::runtime_error(what), state_(std::move(state)) {}
  const EMState& state() const { return state_; }

 private:
  EMState state_;
};

struct WeightedStats {
  std::vector<double> w_bar;  ///< mean responsibility per component
  std::vector<double> x_bar;  ///< responsibility-weighted mean of x
  std::vector<double> y_bar;  ///< responsibility-weighted mean of log x
};

WeightedStats weighted_stats(const Dataset& data, const Responsibilities& w);

/// Responsibilities at `model` together with ℓ_n at `model`.
struct EStepResult {
  Responsibilities responsibilities;
  double log_likelihood;
};

EStepResult e_step_with_likelihood(const Dataset& data, const MixtureModel& model);
Responsibilities e_step(const Dataset& data, const MixtureModel& model);

/// α_j = (n w̄_j + ε) / (n + m ε).
std::vector<double> m_step_alpha(const WeightedStats& stats, std::size_t n, double eps, std::size_t m);

/// s r + r log r - log Γ(r) - r.
double profile_r_objective(double s, double r);

/// s + log r - ψ(r).
double profile_r_derivative(double s, double r);

/// Maximiser of profile_r_objective over [r_min, r_max]: the root of
/// s + log r - ψ(r), clamped. s = 0 returns r_max. Throws
/// std::logic_error when s > 0.
double update_r(double s, const EMConfig& config);

/// Components whose total responsibility n w̄_j falls below this keep their
/// previous scale.
inline constexpr double kEmptyComponentMass = 1e-12;

struct MStepResult {
  MixtureModel model;
  double s;  ///< Σ_j w̄_j (ȳ_j - log x̄_j) over active components
  bool shape_clamped;
  bool degenerate;
};

MStepResult m_step_detailed(const Dataset& data, const Responsibilities& w, const EMConfig& config,
                            const MixtureModel& previous);
MixtureModel m_step(const Dataset& data, const Responsibilities& w, const EMConfig& config,
                    const MixtureModel& previous);

/// Q(r, G; r0, G0) evaluated on the log-x scale with responsibilities from
/// (r0, G0).
double q_function(const Dataset& data, const Responsibilities& w, const MixtureModel& model, double eps);

EMState run_em(const Dataset& data, const MixtureModel& init, const EMConfig& config,
               StartKind kind = StartKind::random);

/// Random start: Dirichlet(1) weights, r0 log-uniform on [0.2, 50] and
/// θ_j = x_drawn / r0 from m distinct data points.
MixtureModel random_start(Rng& rng, const Dataset& data, std::size_t m, const EMConfig& config);

/// Multiplicative log-normal jitter of r and θ_j and a Dirichlet resample of
/// the weights centred on the current ones.
MixtureModel perturb_start(Rng& rng, const MixtureModel& centre, const EMConfig& config);

struct StartRecord {
  std::size_t index;
  StartKind kind;
  bool failed;
  double objective;
  int iterations;
  bool converged;
  double max_descent;
  std::string message;
};

struct MultiStartResult {
  EMState best;
  StartKind provenance;
  std::size_t winner_index;
  std::vector<StartRecord> starts;
};

class MultiStartError : public std::runtime_error {
 public:
  MultiStartError(const std::string& what, std::vector<StartRecord> starts)
      : std::runtime_error(what), starts_(std::move(starts)) {}
  const std::vector<StartRecord>& starts() const { return starts_; }

 private:
  std::vector<StartRecord> starts_;
};

/// Multi-start maximum likelihood. With `truth`, runs the simulation
/// protocol (truth, n_perturbed perturbations of it, n_random random
/// starts). Without it, runs the data protocol (n_initial_random random
/// starts, then n_perturbed perturbations of the tentative winner plus
/// n_random fresh random starts). The winner has the highest modified
/// log-likelihood; ties go to the lowest start index.
MultiStartResult multi_start_mle(const Dataset& data, std::size_t m, const EMConfig& config,
                                 const std::optional<MixtureModel>& truth, std::uint64_t seed);

}  // namespace gmix
