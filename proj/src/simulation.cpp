#include "gmix/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace gmix {

MixtureModel model_one(double r) { return MixtureModel(r, {0.4, 0.6}, {0.5, 5.0}); }

MixtureModel model_two(double r) { return MixtureModel(r, {0.35, 0.55, 0.1}, {0.5, 2.0, 6.0}); }

void ExperimentSpec::validate() const {
  if (n == 0) throw std::invalid_argument("experiment: n must be positive");
  if (replications == 0) throw std::invalid_argument("experiment: replications must be positive");
  std::vector<double> scales = truth.mixing().scales();
  std::sort(scales.begin(), scales.end());
  if (std::adjacent_find(scales.begin(), scales.end()) != scales.end()) {
    throw std::invalid_argument("experiment: true component scales must be distinct");
  }
  em_config.validate();
}

namespace {

std::vector<std::size_t> theta_order(const MixtureModel& model) {
  std::vector<std::size_t> idx(model.order());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return model.scale(a) < model.scale(b); });
  return idx;
}

}  // namespace

std::vector<std::size_t> match_components(const MixtureModel& fitted, const MixtureModel& truth) {
  if (fitted.order() != truth.order()) throw std::invalid_argument("match_components: orders differ");
  const auto f = theta_order(fitted);
  const auto t = theta_order(truth);
  std::vector<std::size_t> perm(truth.order());
  for (std::size_t k = 0; k < t.size(); ++k) perm[t[k]] = f[k];
  return perm;
}

MixtureModel align_to(const MixtureModel& fitted, const MixtureModel& truth) {
  const auto perm = match_components(fitted, truth);
  std::vector<double> alpha(perm.size());
  std::vector<double> theta(perm.size());
  for (std::size_t j = 0; j < perm.size(); ++j) {
    alpha[j] = fitted.weight(perm[j]);
    theta[j] = fitted.scale(perm[j]);
  }
  return MixtureModel(fitted.shape(), std::move(alpha), std::move(theta));
}

ReplicationRecord run_replication(const ExperimentSpec& spec, std::size_t rep) {
  ReplicationRecord rec;
  rec.rep = rep;
  const Rng rep_rng = Rng(spec.seed).child(rep);
  Rng data_rng = rep_rng.child(0);
  const std::uint64_t start_seed = rep_rng.child(1).next();
  try {
    const Dataset data = sample_mixture(data_rng, spec.truth, spec.n);
    MultiStartResult fit = multi_start_mle(data, spec.truth.order(), spec.em_config, spec.truth, start_seed);
    const MixtureModel aligned = align_to(fit.best.model, spec.truth);
    rec.provenance = fit.provenance;
    rec.winner_index = fit.winner_index;
    rec.alpha = aligned.mixing().weights();
    rec.theta = aligned.mixing().scales();
    rec.r = aligned.shape();
    rec.objective = fit.best.objective;
    rec.d_kw = d_kw(aligned, spec.truth);
    rec.shape_clamped = fit.best.shape_clamped;
    for (const StartRecord& s : fit.starts) {
      rec.total_iterations += s.iterations;
      rec.max_descent = std::max(rec.max_descent, s.max_descent);
      if (s.failed) {
        rec.failure += "start " + std::to_string(s.index) + ": " + s.message + "; ";
      }
    }
  } catch (const std::exception& e) {
    rec.excluded = true;
    rec.failure = e.what();
  }
  return rec;
}

void summarize_records(ExperimentReport& report) {
  const std::size_t m = report.truth.order();
  std::vector<double> se_alpha(m, 0.0);
  std::vector<double> se_theta(m, 0.0);
  double se_r = 0.0;
  std::size_t included = 0;
  std::size_t from_truth = 0;
  std::vector<double> dkw;
  report.excluded = 0;
  report.clamped = 0;
  report.max_descent = 0.0;
  for (const ReplicationRecord& rec : report.records) {
    report.max_descent = std::max(report.max_descent, rec.max_descent);
    if (rec.excluded) {
      ++report.excluded;
      continue;
    }
    ++included;
    if (rec.shape_clamped) ++report.clamped;
    if (rec.provenance != StartKind::random) ++from_truth;
    for (std::size_t j = 0; j < m; ++j) {
      const double da = rec.alpha[j] - report.truth.weight(j);
      const double dt = rec.theta[j] - report.truth.scale(j);
      se_alpha[j] += da * da;
      se_theta[j] += dt * dt;
    }
    const double dr = rec.r - report.truth.shape();
    se_r += dr * dr;
    dkw.push_back(rec.d_kw);
  }
  report.rmse_alpha.assign(m, 0.0);
  report.rmse_theta.assign(m, 0.0);
  report.rmse_r = 0.0;
  report.eta = 0.0;
  report.dkw_median = 0.0;
  if (included == 0) return;
  const double k = static_cast<double>(included);
  for (std::size_t j = 0; j < m; ++j) {
    report.rmse_alpha[j] = std::sqrt(se_alpha[j] / k);
    report.rmse_theta[j] = std::sqrt(se_theta[j] / k);
  }
  report.rmse_r = std::sqrt(se_r / k);
  report.eta = static_cast<double>(from_truth) / k;
  std::sort(dkw.begin(), dkw.end());
  const std::size_t mid = dkw.size() / 2;
  report.dkw_median = dkw.size() % 2 == 1 ? dkw[mid] : 0.5 * (dkw[mid - 1] + dkw[mid]);
}

ExperimentReport run_experiment(const ExperimentSpec& spec, unsigned threads) {
  spec.validate();
  ExperimentReport report{spec.truth, spec.n, spec.replications, {}, {}, 0.0, 0.0, 0.0, 0, 0, 0.0,
                          kMatchingRule, {}};
  report.records.resize(spec.replications);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.replications));
  if (threads <= 1) {
    for (std::size_t k = 0; k < spec.replications; ++k) report.records[k] = run_replication(spec, k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < spec.replications; k = next++) {
          report.records[k] = run_replication(spec, k);
        }
      });
    }
  }
  summarize_records(report);
  return report;
}

std::vector<CurvePoint> consistency_curve(const MixtureModel& truth, const std::vector<std::size_t>& sizes,
                                          std::size_t replications, std::uint64_t seed, const EMConfig& config,
                                          unsigned threads) {
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    if (sizes[k] <= sizes[k - 1]) throw std::invalid_argument("consistency_curve: sizes must increase strictly");
  }
  std::vector<CurvePoint> out;
  for (std::size_t n : sizes) {
    ExperimentReport rep = run_experiment({truth, n, replications, seed, config}, threads);
    const double med = rep.dkw_median;
    out.push_back({n, med, std::move(rep)});
  }
  return out;
}

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_replications_csv(std::ostream& out, const ExperimentReport& report) {
  out << "rep,excluded,provenance,winner_start,model,objective,d_kw\n";
  for (const ReplicationRecord& rec : report.records) {
    out << rec.rep << ',' << (rec.excluded ? 1 : 0) << ',';
    if (rec.excluded) {
      out << ",,,,\n";
      continue;
    }
    const MixtureModel fitted(rec.r, rec.alpha, rec.theta);
    out << to_string(rec.provenance) << ',' << rec.winner_index << ',' << to_record(fitted) << ','
        << fmt17(rec.objective) << ',' << fmt17(rec.d_kw) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentReport& report) {
  const std::size_t m = report.truth.order();
  out << "n";
  for (std::size_t j = 0; j < m; ++j) out << ",alpha_" << j + 1;
  out << ",r";
  for (std::size_t j = 0; j < m; ++j) out << ",theta_" << j + 1;
  out << ",eta\n";
  out << report.n;
  for (double v : report.rmse_alpha) out << ',' << fmt17(v);
  out << ',' << fmt17(report.rmse_r);
  for (double v : report.rmse_theta) out << ',' << fmt17(v);
  out << ',' << fmt17(report.eta) << '\n';
}

}  // namespace gmix
