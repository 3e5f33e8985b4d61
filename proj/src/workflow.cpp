#include "gmix/workflow.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "gmix/special.hpp"

namespace gmix {
namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '"'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

LoadResult load_csv(std::istream& in, const std::optional<std::string>& column) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  // Interior blank lines are missing values; trailing ones are not rows.
  while (std::getline(in, line)) rows.push_back(split_fields(line));
  while (!rows.empty() && rows.back().size() == 1 && rows.back().front().empty()) rows.pop_back();
  if (rows.empty()) throw CsvError(CsvErrorCode::no_numeric_column, "input has no rows");

  // A first row is a header when it has a non-empty field that is not a number.
  const bool has_header = std::any_of(rows.front().begin(), rows.front().end(), [](const std::string& f) {
    return !f.empty() && !parse_number(f).has_value();
  });
  const std::size_t first_data = has_header ? 1 : 0;
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.size());

  std::size_t col = 0;
  if (column) {
    if (!has_header) throw CsvError(CsvErrorCode::no_numeric_column, "column '" + *column + "' requested but the file has no header");
    const auto& hdr = rows.front();
    const auto it = std::find(hdr.begin(), hdr.end(), *column);
    if (it == hdr.end()) throw CsvError(CsvErrorCode::no_numeric_column, "no column named '" + *column + "'");
    col = static_cast<std::size_t>(it - hdr.begin());
  } else {
    std::vector<std::size_t> numeric;
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t i = first_data; i < rows.size(); ++i) {
        if (c < rows[i].size() && parse_number(rows[i][c])) {
          numeric.push_back(c);
          break;
        }
      }
    }
    if (numeric.empty()) throw CsvError(CsvErrorCode::no_numeric_column, "input has no numeric column");
    if (numeric.size() > 1) {
      throw CsvError(CsvErrorCode::ambiguous_column, "input has several numeric columns; choose one by name");
    }
    col = numeric.front();
  }

  std::vector<double> x;
  std::size_t excluded = 0;
  for (std::size_t i = first_data; i < rows.size(); ++i) {
    const std::optional<double> v = col < rows[i].size() ? parse_number(rows[i][col]) : std::nullopt;
    if (v && *v > 0.0 && std::isfinite(*v)) {
      x.push_back(*v);
    } else {
      ++excluded;
    }
  }
  if (x.empty()) throw CsvError(CsvErrorCode::no_retained_rows, "no positive observations remain");
  const std::size_t retained = x.size();
  return {Dataset(std::move(x)), retained, excluded};
}

LoadResult load_csv(const std::string& path, const std::optional<std::string>& column) {
  std::ifstream in(path);
  if (!in) throw CsvError(CsvErrorCode::unreadable, "cannot open '" + path + "'");
  return load_csv(in, column);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize(const Dataset& data) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("summarize: need at least two observations");
  std::vector<double> sorted = data.x();
  std::sort(sorted.begin(), sorted.end());
  const double nn = static_cast<double>(n);
  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= nn;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : sorted) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double ss = m2;
  m2 /= nn;
  m3 /= nn;
  m4 /= nn;
  SummaryStats s{};
  s.n = n;
  s.min = sorted.front();
  s.q25 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q75 = quantile_sorted(sorted, 0.75);
  s.max = sorted.back();
  s.mean = mean;
  s.sd = std::sqrt(ss / (nn - 1.0));
  s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  s.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
  return s;
}

void write_summary(std::ostream& out, const SummaryStats& s) {
  out << "n,min,q25,median,q75,max,mean,sd,skewness,kurtosis\n"
      << s.n << ',' << fmt17(s.min) << ',' << fmt17(s.q25) << ',' << fmt17(s.median) << ',' << fmt17(s.q75) << ','
      << fmt17(s.max) << ',' << fmt17(s.mean) << ',' << fmt17(s.sd) << ',' << fmt17(s.skewness) << ','
      << fmt17(s.kurtosis) << '\n';
}

bool FitTable::likelihood_monotone(double slack) const {
  for (std::size_t k = 1; k < records.size(); ++k) {
    if (records[k].log_likelihood < records[k - 1].log_likelihood - slack) return false;
  }
  return true;
}

std::size_t recommend_order(const std::vector<std::size_t>& orders, const std::vector<double>& log_likelihoods,
                            double threshold) {
  if (orders.empty() || orders.size() != log_likelihoods.size()) {
    throw std::invalid_argument("recommend_order: orders and log-likelihoods must be nonempty and aligned");
  }
  std::size_t best = orders.front();
  for (std::size_t k = 1; k < orders.size(); ++k) {
    if (log_likelihoods[k] - log_likelihoods[k - 1] < threshold) break;
    best = orders[k];
  }
  return best;
}

FitTable fit_orders(const Dataset& data, std::vector<std::size_t> orders, const EMConfig& config,
                    std::uint64_t seed, double threshold) {
  if (orders.empty()) throw std::invalid_argument("fit_orders: no orders requested");
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  FitTable table;
  table.threshold = threshold;
  const Rng master(seed);
  for (std::size_t m : orders) {
    MultiStartResult fit = [&] {
      try {
        return multi_start_mle(data, m, config, std::nullopt, master.child(m).next());
      } catch (const MultiStartError& e) {
        throw MultiStartError("order m=" + std::to_string(m) + ": " + e.what(), e.starts());
      }
    }();
    FitRecord rec;
    rec.m = m;
    rec.r = fit.best.model.shape();
    rec.alpha = fit.best.model.mixing().weights();
    rec.theta = fit.best.model.mixing().scales();
    rec.log_likelihood = fit.best.log_likelihood;
    rec.modified_log_likelihood = fit.best.objective;
    rec.iterations = fit.best.iterations;
    rec.converged = fit.best.converged;
    rec.winner_start = fit.winner_index;
    rec.provenance = fit.provenance;
    rec.failed_starts = static_cast<std::size_t>(
        std::count_if(fit.starts.begin(), fit.starts.end(), [](const StartRecord& s) { return s.failed; }));
    table.records.push_back(std::move(rec));
  }
  std::vector<double> ll;
  for (const auto& rec : table.records) ll.push_back(rec.log_likelihood);
  table.recommended = recommend_order(orders, ll, threshold);
  return table;
}

void write_fit_table(std::ostream& out, const FitTable& table) {
  std::size_t width = 0;
  for (const auto& rec : table.records) width = std::max(width, rec.m);
  out << "m,r,log_likelihood,modified_log_likelihood,iterations,converged,winner_start,provenance,"
         "failed_starts,recommended,threshold";
  for (std::size_t j = 0; j < width; ++j) out << ",alpha_" << j + 1;
  for (std::size_t j = 0; j < width; ++j) out << ",theta_" << j + 1;
  out << '\n';
  for (const auto& rec : table.records) {
    out << rec.m << ',' << fmt17(rec.r) << ',' << fmt17(rec.log_likelihood) << ','
        << fmt17(rec.modified_log_likelihood) << ',' << rec.iterations << ',' << (rec.converged ? 1 : 0) << ','
        << rec.winner_start << ',' << to_string(rec.provenance) << ',' << rec.failed_starts << ','
        << (rec.m == table.recommended ? 1 : 0) << ',' << fmt17(table.threshold);
    for (std::size_t j = 0; j < width; ++j) out << ',' << (j < rec.m ? fmt17(rec.alpha[j]) : "");
    for (std::size_t j = 0; j < width; ++j) out << ',' << (j < rec.m ? fmt17(rec.theta[j]) : "");
    out << '\n';
  }
}

FitTable read_fit_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("fit table: missing header");
  const auto header = split_fields(line);
  constexpr std::size_t kFixed = 11;
  if (header.size() < kFixed || (header.size() - kFixed) % 2 != 0 || header.front() != "m") {
    throw std::invalid_argument("fit table: unexpected header");
  }
  const std::size_t width = (header.size() - kFixed) / 2;
  auto num = [](const std::string& f) {
    const auto v = parse_number(f);
    if (!v) throw std::invalid_argument("fit table: bad number '" + f + "'");
    return *v;
  };
  auto kind = [](const std::string& f) {
    if (f == "truth") return StartKind::truth;
    if (f == "perturbed") return StartKind::perturbed;
    if (f == "random") return StartKind::random;
    throw std::invalid_argument("fit table: bad provenance '" + f + "'");
  };
  FitTable table;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) throw std::invalid_argument("fit table: ragged row");
    FitRecord rec;
    rec.m = static_cast<std::size_t>(num(f[0]));
    if (rec.m == 0 || rec.m > width) throw std::invalid_argument("fit table: bad order");
    rec.r = num(f[1]);
    rec.log_likelihood = num(f[2]);
    rec.modified_log_likelihood = num(f[3]);
    rec.iterations = static_cast<int>(num(f[4]));
    rec.converged = num(f[5]) != 0.0;
    rec.winner_start = static_cast<std::size_t>(num(f[6]));
    rec.provenance = kind(f[7]);
    rec.failed_starts = static_cast<std::size_t>(num(f[8]));
    if (num(f[9]) != 0.0) table.recommended = rec.m;
    table.threshold = num(f[10]);
    for (std::size_t j = 0; j < rec.m; ++j) {
      rec.alpha.push_back(num(f[kFixed + j]));
      rec.theta.push_back(num(f[kFixed + width + j]));
    }
    table.records.push_back(std::move(rec));
  }
  return table;
}

double mixture_cdf(double x, const MixtureModel& model) {
  if (x <= 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < model.order(); ++j) {
    if (model.weight(j) == 0.0) continue;
    total += model.weight(j) * gamma_p(model.shape(), x / model.scale(j));
  }
  return std::min(total, 1.0);
}

double mixture_log_quantile(double p, const MixtureModel& model) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("mixture_log_quantile: p must lie in (0, 1)");
  const double r = model.shape();
  // Y = log X has mean ψ(r) + log θ_j and variance ψ'(r) per component.
  const double spread = 12.0 * std::sqrt(trigamma(r));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < model.order(); ++j) {
    const double mu = digamma(r) + std::log(model.scale(j));
    lo = std::min(lo, mu - spread);
    hi = std::max(hi, mu + spread);
  }
  auto cdf = [&](double y) { return mixture_cdf(std::exp(y), model); };
  while (cdf(lo) > p) lo -= spread;
  while (cdf(hi) < p) hi += spread;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<QQPoint> qq_data(const Dataset& data, const MixtureModel& model, std::size_t n_points) {
  if (n_points == 0) throw std::invalid_argument("qq_data: n_points must be positive");
  std::vector<double> sorted = data.y();
  std::sort(sorted.begin(), sorted.end());
  std::vector<QQPoint> out;
  out.reserve(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double p = (static_cast<double>(k) + 0.5) / static_cast<double>(n_points);
    out.push_back({p, quantile_sorted(sorted, p), mixture_log_quantile(p, model)});
  }
  return out;
}

void write_qq_csv(std::ostream& out, const std::vector<QQPoint>& points) {
  out << "empirical_log_quantile,model_log_quantile\n";
  for (const QQPoint& q : points) out << fmt17(q.empirical) << ',' << fmt17(q.model) << '\n';
}

}  // namespace gmix
