#include "gmix/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmix/special.hpp"
#include "json.hpp"

namespace gmix {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Jensen gives s <= 0; rounding on near-degenerate data can leave a tiny
// positive residue, which is treated as s = 0.
constexpr double kPositiveSlack = 1e-12;

}  // namespace

void EMConfig::validate() const {
  if (!(eps_penalty >= 0.0)) throw std::invalid_argument("EMConfig: eps_penalty must be nonnegative");
  if (!(tol > 0.0)) throw std::invalid_argument("EMConfig: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("EMConfig: max_iter must be positive");
  if (!(r_min > 0.0 && r_min < r_max && std::isfinite(r_max))) {
    throw std::invalid_argument("EMConfig: need 0 < r_min < r_max < inf");
  }
  if (n_perturbed < 0 || n_random < 0 || n_initial_random < 0) {
    throw std::invalid_argument("EMConfig: start counts must be nonnegative");
  }
  if (!(perturb_scale > 0.0)) throw std::invalid_argument("EMConfig: perturb_scale must be positive");
}

const char* to_string(StartKind kind) {
  switch (kind) {
    case StartKind::truth: return "truth";
    case StartKind::perturbed: return "perturbed";
    case StartKind::random: return "random";
  }
  return "unknown";
}

std::string to_json(const EMState& state) {
  nlohmann::ordered_json j;
  j["model"] = to_record(state.model);
  j["objective"] = state.objective;
  j["log_likelihood"] = state.log_likelihood;
  j["iterations"] = state.iterations;
  j["converged"] = state.converged;
  j["initial_kind"] = to_string(state.initial_kind);
  return j.dump();
}

WeightedStats weighted_stats(const Dataset& data, const Responsibilities& w) {
  const std::size_t n = w.rows();
  const std::size_t m = w.cols();
  const auto& x = data.x();
  const auto& y = data.y();
  WeightedStats st{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  std::vector<double> mass(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double wij = w(i, j);
      mass[j] += wij;
      st.x_bar[j] += wij * x[i];
      st.y_bar[j] += wij * y[i];
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    st.w_bar[j] = mass[j] / static_cast<double>(n);
    if (mass[j] > 0.0) {
      st.x_bar[j] /= mass[j];
      st.y_bar[j] /= mass[j];
    } else {
      st.x_bar[j] = std::numeric_limits<double>::quiet_NaN();
      st.y_bar[j] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return st;
}

EStepResult e_step_with_likelihood(const Dataset& data, const MixtureModel& model) {
  const std::size_t n = data.size();
  const std::size_t m = model.order();
  const double r = model.shape();
  const double lg = ln_gamma(r);
  // log α_j + r (y - log θ_j) - x/θ_j - log Γ(r) = r y - x inv_j + offset_j
  std::vector<double> offset(m);
  std::vector<double> inv(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double a = model.weight(j);
    offset[j] = a > 0.0 ? std::log(a) - r * std::log(model.scale(j)) - lg : kNegInf;
    inv[j] = 1.0 / model.scale(j);
  }
  EStepResult out{Responsibilities(n, m), 0.0};
  std::vector<double> terms(m);
  const auto& x = data.x();
  const auto& y = data.y();
  for (std::size_t i = 0; i < n; ++i) {
    double best = kNegInf;
    for (std::size_t j = 0; j < m; ++j) {
      terms[j] = offset[j] == kNegInf ? kNegInf : r * y[i] - x[i] * inv[j] + offset[j];
      best = std::max(best, terms[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      terms[j] = std::exp(terms[j] - best);
      sum += terms[j];
    }
    for (std::size_t j = 0; j < m; ++j) out.responsibilities(i, j) = terms[j] / sum;
    out.log_likelihood += best + std::log(sum);
  }
  return out;
}

Responsibilities e_step(const Dataset& data, const MixtureModel& model) {
  return e_step_with_likelihood(data, model).responsibilities;
}

std::vector<double> m_step_alpha(const WeightedStats& stats, std::size_t n, double eps, std::size_t m) {
  if (n == 0) throw std::invalid_argument("m_step_alpha: n must be positive");
  const double nn = static_cast<double>(n);
  const double denom = nn + static_cast<double>(m) * eps;
  std::vector<double> alpha(m);
  for (std::size_t j = 0; j < m; ++j) alpha[j] = (nn * stats.w_bar[j] + eps) / denom;
  return alpha;
}

double profile_r_objective(double s, double r) {
  // r log r - r - log Γ(r) = (log r - log 2π)/2 - stirling_correction(r)
  constexpr double kHalfLogTwoPi = 0.91893853320467274178;
  return s * r + 0.5 * std::log(r) - kHalfLogTwoPi - stirling_correction(r);
}

double profile_r_derivative(double s, double r) { return s + log_minus_digamma(r); }

double update_r(double s, const EMConfig& config) {
  if (s > 0.0) throw std::logic_error("update_r: s must be nonpositive (Jensen violated)");
  if (s == 0.0) return config.r_max;
  const double r_lo = config.r_min;
  const double r_hi = config.r_max;
  if (profile_r_derivative(s, r_hi) >= 0.0) return r_hi;
  if (profile_r_derivative(s, r_lo) <= 0.0) return r_lo;

  // Bracketed Newton on u = log r; φ(u) = s + log r - ψ(r) is decreasing.
  double lo = std::log(r_lo);
  double hi = std::log(r_hi);
  const double z = -s;
  // Closed-form approximation to the single-Gamma shape MLE as a start.
  double u = std::log((3.0 - z + std::sqrt((z - 3.0) * (z - 3.0) + 24.0 * z)) / (12.0 * z));
  if (!(u > lo && u < hi)) u = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double r = std::exp(u);
    const double f = profile_r_derivative(s, r);
    if (f == 0.0) return r;
    if (f > 0.0) {
      lo = u;
    } else {
      hi = u;
    }
    const double slope = r * log_minus_digamma_derivative(r);
    double next = u - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - u) <= 1e-15 * std::max(1.0, std::fabs(u))) {
      u = next;
      break;
    }
    u = next;
  }
  return std::exp(u);
}

MStepResult m_step_detailed(const Dataset& data, const Responsibilities& w, const EMConfig& config,
                            const MixtureModel& previous) {
  const std::size_t n = data.size();
  const std::size_t m = w.cols();
  if (previous.order() != m) throw std::invalid_argument("m_step: model order does not match responsibilities");
  const WeightedStats st = weighted_stats(data, w);

  double s = 0.0;
  double active_mass = 0.0;
  std::vector<bool> active(m, false);
  for (std::size_t j = 0; j < m; ++j) {
    if (static_cast<double>(n) * st.w_bar[j] < kEmptyComponentMass) continue;
    active[j] = true;
    active_mass += st.w_bar[j];
    s += st.w_bar[j] * (st.y_bar[j] - std::log(st.x_bar[j]));
  }
  if (active_mass <= 0.0) throw std::logic_error("m_step: no component carries responsibility");
  // Held components drop out of the profile; rescale so the remaining
  // coefficient of (r log r - r - log Γ(r)) is 1.
  s /= active_mass;
  if (s > 0.0 && s <= kPositiveSlack) s = 0.0;
  const bool degenerate = s == 0.0;
  const double r = update_r(s, config);
  std::vector<double> theta(m);
  for (std::size_t j = 0; j < m; ++j) theta[j] = active[j] ? st.x_bar[j] / r : previous.scale(j);
  std::vector<double> alpha = m_step_alpha(st, n, config.eps_penalty, m);
  const bool clamped = r <= config.r_min || r >= config.r_max;
  return {MixtureModel(r, std::move(alpha), std::move(theta)), s, clamped, degenerate};
}

MixtureModel m_step(const Dataset& data, const Responsibilities& w, const EMConfig& config,
                    const MixtureModel& previous) {
  return m_step_detailed(data, w, config, previous).model;
}

double q_function(const Dataset& data, const Responsibilities& w, const MixtureModel& model, double eps) {
  const std::size_t m = model.order();
  const auto& x = data.x();
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double wij = w(i, j);
      if (wij == 0.0) continue;
      total += wij * (std::log(model.weight(j)) + gamma_log_pdf(x[i], model.shape(), model.scale(j)));
    }
  }
  return total + weight_penalty(model.mixing().weights(), eps);
}

EMState run_em(const Dataset& data, const MixtureModel& init, const EMConfig& config, StartKind kind) {
  config.validate();
  if (init.shape() < config.r_min || init.shape() > config.r_max) {
    throw std::invalid_argument("run_em: initial shape outside [r_min, r_max]");
  }
  EStepResult e = e_step_with_likelihood(data, init);
  EMState state{init, std::move(e.responsibilities), 0.0, e.log_likelihood, 0, false, kind, 0.0, false, false};
  state.objective = state.log_likelihood + weight_penalty(init.mixing().weights(), config.eps_penalty);
  if (std::isnan(state.objective) || state.objective == std::numeric_limits<double>::infinity()) {
    throw NumericalFailure("run_em: non-finite objective at the initial value", std::move(state));
  }

  while (state.iterations < config.max_iter) {
    MStepResult ms = m_step_detailed(data, state.responsibilities, config, state.model);
    EStepResult next = e_step_with_likelihood(data, ms.model);
    const double objective =
        next.log_likelihood + weight_penalty(ms.model.mixing().weights(), config.eps_penalty);
    ++state.iterations;
    state.shape_clamped = state.shape_clamped || ms.shape_clamped;
    state.degenerate = state.degenerate || ms.degenerate;
    if (!std::isfinite(objective)) {
      throw NumericalFailure("run_em: objective became non-finite at iteration " +
                                 std::to_string(state.iterations),
                             std::move(state));
    }
    const double change = objective - state.objective;
    if (change < 0.0) state.max_descent = std::max(state.max_descent, -change);
    state.model = std::move(ms.model);
    state.responsibilities = std::move(next.responsibilities);
    state.log_likelihood = next.log_likelihood;
    state.objective = objective;
    if (std::fabs(change) < config.tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

MixtureModel random_start(Rng& rng, const Dataset& data, std::size_t m, const EMConfig& config) {
  if (m == 0) throw std::invalid_argument("random_start: m must be positive");
  const double log_lo = std::log(0.2);
  const double log_hi = std::log(50.0);
  const double r0 = std::clamp(std::exp(log_lo + (log_hi - log_lo) * rng.uniform()), config.r_min, config.r_max);

  const std::size_t n = data.size();
  std::vector<std::size_t> picked;
  picked.reserve(m);
  while (picked.size() < m) {
    const auto idx = static_cast<std::size_t>(rng.below(n));
    if (n >= m && std::find(picked.begin(), picked.end(), idx) != picked.end()) continue;
    picked.push_back(idx);
  }
  std::vector<double> theta(m);
  for (std::size_t j = 0; j < m; ++j) theta[j] = data.x()[picked[j]] / r0;
  std::vector<double> alpha = sample_dirichlet(rng, std::vector<double>(m, 1.0));
  return MixtureModel(r0, std::move(alpha), std::move(theta));
}

MixtureModel perturb_start(Rng& rng, const MixtureModel& centre, const EMConfig& config) {
  const double s = config.perturb_scale;
  const double r = std::clamp(centre.shape() * std::exp(s * rng.normal()), config.r_min, config.r_max);
  std::vector<double> theta(centre.order());
  for (std::size_t j = 0; j < centre.order(); ++j) theta[j] = centre.scale(j) * std::exp(s * rng.normal());
  // Concentration 1/s^2 gives weight jitter of order s sqrt(α(1-α)).
  const double kappa = 1.0 / (s * s);
  std::vector<double> conc(centre.order());
  for (std::size_t j = 0; j < centre.order(); ++j) conc[j] = kappa * std::max(centre.weight(j), 1e-8);
  return MixtureModel(r, sample_dirichlet(rng, conc), std::move(theta));
}

namespace {

struct StartOutcome {
  std::optional<EMState> state;
  StartRecord record;
};

StartOutcome run_start(const Dataset& data, const MixtureModel& init, const EMConfig& config, StartKind kind,
                       std::size_t index) {
  StartOutcome out{std::nullopt, StartRecord{index, kind, true, kNegInf, 0, false, 0.0, {}}};
  try {
    EMState st = run_em(data, init, config, kind);
    out.record.failed = false;
    out.record.objective = st.objective;
    out.record.iterations = st.iterations;
    out.record.converged = st.converged;
    out.record.max_descent = st.max_descent;
    out.state = std::move(st);
  } catch (const NumericalFailure& e) {
    out.record.message = e.what();
    out.record.iterations = e.state().iterations;
    out.record.max_descent = e.state().max_descent;
  } catch (const std::exception& e) {
    out.record.message = e.what();
  }
  return out;
}

class Tournament {
 public:
  void offer(StartOutcome outcome) {
    const StartRecord rec = outcome.record;
    records_.push_back(rec);
    if (!outcome.state) return;
    if (!best_ || outcome.state->objective > best_->objective) {
      best_ = std::move(outcome.state);
      winner_ = rec.index;
      provenance_ = rec.kind;
    }
  }
  bool empty() const { return !best_.has_value(); }
  const EMState& best() const { return *best_; }
  MultiStartResult finish() && {
    if (!best_) throw MultiStartError("multi_start_mle: every start failed", std::move(records_));
    return {std::move(*best_), provenance_, winner_, std::move(records_)};
  }

 private:
  std::optional<EMState> best_;
  std::size_t winner_ = 0;
  StartKind provenance_ = StartKind::random;
  std::vector<StartRecord> records_;
};

}  // namespace

MultiStartResult multi_start_mle(const Dataset& data, std::size_t m, const EMConfig& config,
                                 const std::optional<MixtureModel>& truth, std::uint64_t seed) {
  config.validate();
  if (m == 0) throw std::invalid_argument("multi_start_mle: m must be positive");
  if (truth && truth->order() != m) throw std::invalid_argument("multi_start_mle: truth has the wrong order");
  const Rng master(seed);
  Tournament t;
  std::size_t index = 0;
  auto run_random = [&](int count) {
    for (int k = 0; k < count; ++k, ++index) {
      Rng rng = master.child(index);
      t.offer(run_start(data, random_start(rng, data, m, config), config, StartKind::random, index));
    }
  };
  auto run_perturbed = [&](const MixtureModel& centre) {
    for (int k = 0; k < config.n_perturbed; ++k, ++index) {
      Rng rng = master.child(index);
      t.offer(run_start(data, perturb_start(rng, centre, config), config, StartKind::perturbed, index));
    }
  };

  if (truth) {
    MixtureModel centre(std::clamp(truth->shape(), config.r_min, config.r_max), truth->mixing());
    t.offer(run_start(data, centre, config, StartKind::truth, index++));
    run_perturbed(centre);
    run_random(config.n_random);
  } else {
    run_random(config.n_initial_random);
    if (t.empty()) return std::move(t).finish();
    const MixtureModel tentative = t.best().model;
    run_perturbed(tentative);
    run_random(config.n_random);
  }
  return std::move(t).finish();
}

}  // namespace gmix
