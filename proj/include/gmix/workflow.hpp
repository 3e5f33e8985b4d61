#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmix/em.hpp"
#include "gmix/model.hpp"

namespace gmix {

enum class CsvErrorCode { unreadable, no_numeric_column, ambiguous_column, no_retained_rows };

class CsvError : public std::runtime_error {
 public:
  CsvError(CsvErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  CsvErrorCode code() const { return code_; }

 private:
  CsvErrorCode code_;
};

struct LoadResult {
  Dataset data;
  std::size_t retained;
  std::size_t excluded;  ///< missing, unparsable or nonpositive entries
};

/// Reads one numeric column of a comma-separated file. A header row is
/// optional; `column` selects a column by header name, otherwise the file
/// must have exactly one numeric column. Missing, non-numeric and
/// nonpositive entries are dropped and counted.
LoadResult load_csv(const std::string& path, const std::optional<std::string>& column = std::nullopt);
LoadResult load_csv(std::istream& in, const std::optional<std::string>& column = std::nullopt);

struct SummaryStats {
  std::size_t n;
  double min, q25, median, q75, max;
  double mean;
  double sd;        ///< sample (n - 1) standard deviation
  double skewness;  ///< m3 / m2^{3/2}, population central moments
  double kurtosis;  ///< m4 / m2^2, non-excess
};

/// Type-7 (linear interpolation of order statistics) quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Throws std::invalid_argument when n < 2.
SummaryStats summarize(const Dataset& data);

void write_summary(std::ostream& out, const SummaryStats& s);

struct FitRecord {
  std::size_t m = 0;
  double r = 0.0;
  std::vector<double> alpha;
  std::vector<double> theta;
  double log_likelihood = 0.0;
  double modified_log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t winner_start = 0;
  StartKind provenance = StartKind::random;
  std::size_t failed_starts = 0;

  MixtureModel model() const { return MixtureModel(r, alpha, theta); }
};

struct FitTable {
  std::vector<FitRecord> records;  ///< ascending m
  std::size_t recommended = 0;
  double threshold = 40.0;

  /// ℓ_n nondecreasing in m within `slack`.
  bool likelihood_monotone(double slack = 1e-6) const;
};

/// Largest order reached by successive log-likelihood gains of at least
/// `threshold`, stopping at the first smaller gain.
std::size_t recommend_order(const std::vector<std::size_t>& orders, const std::vector<double>& log_likelihoods,
                            double threshold);

/// Fits every order in `orders` with the data-mode multi-start protocol.
FitTable fit_orders(const Dataset& data, std::vector<std::size_t> orders, const EMConfig& config,
                    std::uint64_t seed, double threshold = 40.0);

void write_fit_table(std::ostream& out, const FitTable& table);
/// Throws std::invalid_argument on malformed input.
FitTable read_fit_table(std::istream& in);

/// F(x) = Σ α_j P(r, x/θ_j).
double mixture_cdf(double x, const MixtureModel& model);

/// y with F(e^y) = p, found by bisection on the log scale.
double mixture_log_quantile(double p, const MixtureModel& model);

struct QQPoint {
  double probability;
  double empirical;  ///< log-scale sample quantile
  double model;      ///< log-scale model quantile
};

/// Quantile pairs at p_k = (k - 1/2)/n_points, both on the log scale.
std::vector<QQPoint> qq_data(const Dataset& data, const MixtureModel& model, std::size_t n_points);

void write_qq_csv(std::ostream& out, const std::vector<QQPoint>& points);

}  // namespace gmix
