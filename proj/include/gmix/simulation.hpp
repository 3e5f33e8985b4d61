#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gmix/em.hpp"
#include "gmix/model.hpp"

namespace gmix {

/// 0.4 f(x; r, 0.5) + 0.6 f(x; r, 5)
MixtureModel model_one(double r);
/// 0.35 f(x; r, 0.5) + 0.55 f(x; r, 2) + 0.1 f(x; r, 6)
MixtureModel model_two(double r);

struct ExperimentSpec {
  MixtureModel truth;
  std::size_t n;
  std::size_t replications;
  std::uint64_t seed;
  EMConfig em_config;

  /// Throws std::invalid_argument if n or replications is zero or the true
  /// scales are not distinct.
  void validate() const;
};

/// perm[j] is the fitted component matched to truth component j, pairing
/// both sides in ascending-θ order.
std::vector<std::size_t> match_components(const MixtureModel& fitted, const MixtureModel& truth);

/// Fitted model relabelled so component j corresponds to truth component j.
MixtureModel align_to(const MixtureModel& fitted, const MixtureModel& truth);

inline constexpr const char* kMatchingRule = "sorted-theta";

struct ReplicationRecord {
  std::size_t rep = 0;
  bool excluded = false;
  std::string failure;
  StartKind provenance = StartKind::random;
  std::size_t winner_index = 0;
  /// Aligned to the truth's labelling. Only meaningful when not excluded.
  std::vector<double> alpha;
  std::vector<double> theta;
  double r = 0.0;
  double objective = 0.0;
  double d_kw = 0.0;
  /// Largest per-iteration objective decrease over every start.
  double max_descent = 0.0;
  bool shape_clamped = false;
  int total_iterations = 0;
};

struct ExperimentReport {
  MixtureModel truth;
  std::size_t n = 0;
  std::size_t replications = 0;
  std::vector<double> rmse_alpha;
  std::vector<double> rmse_theta;
  double rmse_r = 0.0;
  double eta = 0.0;
  double dkw_median = 0.0;
  std::size_t excluded = 0;
  std::size_t clamped = 0;
  double max_descent = 0.0;
  std::string matching_rule = kMatchingRule;
  std::vector<ReplicationRecord> records;
};

/// Fits one replication. Replication k draws its data and starts from
/// streams derived from (seed, k) only.
ReplicationRecord run_replication(const ExperimentSpec& spec, std::size_t rep);

/// Runs every replication, using up to `threads` workers (0 picks the
/// hardware concurrency). The report does not depend on `threads`.
ExperimentReport run_experiment(const ExperimentSpec& spec, unsigned threads = 1);

/// RMSEs, η and the d_kw median from per-replication records. Excluded
/// records are skipped; η is over the included ones.
void summarize_records(ExperimentReport& report);

struct CurvePoint {
  std::size_t n;
  double dkw_median;
  ExperimentReport report;
};

std::vector<CurvePoint> consistency_curve(const MixtureModel& truth, const std::vector<std::size_t>& sizes,
                                          std::size_t replications, std::uint64_t seed, const EMConfig& config,
                                          unsigned threads = 1);

/// One row per replication: rep, excluded, provenance, winner start, model
/// record, objective, d_kw.
void write_replications_csv(std::ostream& out, const ExperimentReport& report);

/// Header `n,alpha_1..alpha_m,r,theta_1..theta_m,eta` and one row.
void write_summary_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace gmix
