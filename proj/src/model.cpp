#include "gmix/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gmix/special.hpp"

namespace gmix {
namespace {

constexpr double kWeightSumTolerance = 1e-12;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::domain_error(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

MixingDistribution::MixingDistribution(std::vector<double> weights, std::vector<double> scales)
    : weights_(std::move(weights)), scales_(std::move(scales)) {
  if (weights_.empty()) throw std::invalid_argument("mixing distribution needs at least one component");
  if (weights_.size() != scales_.size()) {
    throw std::invalid_argument("mixing distribution: weights and scales differ in length");
  }
  double total = 0.0;
  for (double a : weights_) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("mixing weight outside [0, 1]");
    total += a;
  }
  if (std::fabs(total - 1.0) > kWeightSumTolerance) {
    throw std::invalid_argument("mixing weights do not sum to 1");
  }
  for (double t : scales_) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("component scale must be positive and finite");
  }
}

MixingDistribution MixingDistribution::point_mass(double scale) { return {{1.0}, {scale}}; }

MixtureModel::MixtureModel(double shape, MixingDistribution mixing) : shape_(shape), mixing_(std::move(mixing)) {
  if (!(shape_ > 0.0) || !std::isfinite(shape_)) throw std::invalid_argument("shape must be positive and finite");
}

MixtureModel::MixtureModel(double shape, std::vector<double> weights, std::vector<double> scales)
    : MixtureModel(shape, MixingDistribution(std::move(weights), std::move(scales))) {}

Dataset::Dataset(std::vector<double> x) : x_(std::move(x)) {
  if (x_.empty()) throw std::invalid_argument("dataset is empty");
  y_.reserve(x_.size());
  for (double v : x_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("observations must be positive and finite");
    y_.push_back(std::log(v));
  }
}

double gamma_log_pdf(double x, double r, double theta) {
  require_positive(x, "x");
  require_positive(r, "shape");
  require_positive(theta, "scale");
  return (r - 1.0) * std::log(x) - x / theta - r * std::log(theta) - ln_gamma(r);
}

double loggamma_log_pdf(double y, double r, double theta) {
  require_positive(r, "shape");
  require_positive(theta, "scale");
  const double z = y - std::log(theta);
  return r * z - std::exp(z) - ln_gamma(r);
}

double mixture_log_density(double y, const MixtureModel& model) {
  const double r = model.shape();
  const double lg = ln_gamma(r);
  const std::size_t m = model.order();
  double best = -std::numeric_limits<double>::infinity();
  // Two passes: find the max term, then accumulate.
  for (std::size_t j = 0; j < m; ++j) {
    if (model.weight(j) == 0.0) continue;
    const double z = y - std::log(model.scale(j));
    best = std::max(best, std::log(model.weight(j)) + r * z - std::exp(z) - lg);
  }
  if (!std::isfinite(best)) return best;
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (model.weight(j) == 0.0) continue;
    const double z = y - std::log(model.scale(j));
    sum += std::exp(std::log(model.weight(j)) + r * z - std::exp(z) - lg - best);
  }
  return best + std::log(sum);
}

double log_likelihood(const Dataset& data, const MixtureModel& model) {
  double total = 0.0;
  for (double y : data.y()) total += mixture_log_density(y, model);
  return total;
}

double weight_penalty(std::span<const double> weights, double eps) {
  if (eps < 0.0) throw std::invalid_argument("penalty eps must be nonnegative");
  if (eps == 0.0) return 0.0;
  double total = 0.0;
  for (double a : weights) {
    if (a <= 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log(a);
  }
  return eps * total;
}

double modified_log_likelihood(const Dataset& data, const MixtureModel& model, double eps) {
  const double penalty = weight_penalty(model.mixing().weights(), eps);
  if (std::isinf(penalty)) return penalty;
  return log_likelihood(data, model) + penalty;
}

double d_kw(const MixtureModel& a, const MixtureModel& b) {
  struct Jump {
    double at;
    double delta;  // jump of G_a - G_b
  };
  std::vector<Jump> jumps;
  jumps.reserve(a.order() + b.order());
  for (std::size_t j = 0; j < a.order(); ++j) jumps.push_back({a.scale(j), a.weight(j)});
  for (std::size_t j = 0; j < b.order(); ++j) jumps.push_back({b.scale(j), -b.weight(j)});
  std::sort(jumps.begin(), jumps.end(), [](const Jump& l, const Jump& r) { return l.at < r.at; });

  // G_a - G_b is 0 on (0, t_1) and constant between consecutive support
  // points; after the last point both CDFs equal 1.
  double integral = 0.0;
  double diff = 0.0;
  std::size_t k = 0;
  while (k < jumps.size()) {
    const double t = jumps[k].at;
    while (k < jumps.size() && jumps[k].at == t) diff += jumps[k++].delta;
    if (k == jumps.size()) break;
    const double next = jumps[k].at;
    integral += std::fabs(diff) * std::exp(-t) * -std::expm1(-(next - t));
  }
  return std::fabs(std::atan(a.shape()) - std::atan(b.shape())) + integral;
}

double mgf_log_y(const MixtureModel& model, double t) {
  const double r = model.shape();
  if (!(t > -r)) throw std::domain_error("mgf_log_y: requires t > -r");
  const double ratio = ln_gamma(r + t) - ln_gamma(r);
  double total = 0.0;
  for (std::size_t j = 0; j < model.order(); ++j) {
    total += model.weight(j) * std::exp(t * std::log(model.scale(j)) + ratio);
  }
  return total;
}

double density_sup_bound(const MixtureModel& model) {
  const double r = model.shape();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < model.order(); ++j) {
    best = std::max(best, mixture_log_density(std::log(r * model.scale(j)), model));
  }
  return std::exp(best);
}

double empirical_interval_bound(const Dataset& data, double eps, std::span<const double> grid) {
  if (!(eps > 0.0)) throw std::invalid_argument("empirical_interval_bound: eps must be positive");
  std::vector<double> sorted = data.y();
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::size_t best = 0;
  for (double u : grid) {
    // Open window (u - eps, u + eps).
    const auto lo = std::upper_bound(sorted.begin(), sorted.end(), u - eps);
    const auto hi = std::lower_bound(lo, sorted.end(), u + eps);
    best = std::max(best, static_cast<std::size_t>(hi - lo));
  }
  return static_cast<double>(best) / n;
}

std::string to_record(const MixtureModel& model) {
  std::string out = std::to_string(model.order());
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += ' ';
    out += buf;
  };
  put(model.shape());
  for (double a : model.mixing().weights()) put(a);
  for (double t : model.mixing().scales()) put(t);
  return out;
}

MixtureModel parse_record(std::string_view text) {
  std::istringstream in{std::string(text)};
  long long m = 0;
  if (!(in >> m) || m < 1) throw std::invalid_argument("model record: bad component count");
  double r = 0.0;
  if (!(in >> r)) throw std::invalid_argument("model record: missing shape");
  std::vector<double> weights(static_cast<std::size_t>(m));
  std::vector<double> scales(static_cast<std::size_t>(m));
  for (double& a : weights) {
    if (!(in >> a)) throw std::invalid_argument("model record: missing weight");
  }
  for (double& t : scales) {
    if (!(in >> t)) throw std::invalid_argument("model record: missing scale");
  }
  std::string rest;
  if (in >> rest) throw std::invalid_argument("model record: trailing tokens");
  return MixtureModel(r, std::move(weights), std::move(scales));
}

}  // namespace gmix
