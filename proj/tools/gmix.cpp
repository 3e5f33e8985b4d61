// gmix: fit structural-shape Gamma mixtures, run simulation experiments
// and emit QQ data.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gmix/em.hpp"
#include "gmix/simulation.hpp"
#include "gmix/workflow.hpp"

namespace fs = std::filesystem;

namespace {

// sysexits-style codes.
constexpr int kExitUsage = 64;
constexpr int kExitParse = 65;
constexpr int kExitNumerical = 70;
constexpr int kExitIo = 74;

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::size_t> parse_orders(const std::string& text) {
  std::vector<std::size_t> out;
  auto to_size = [&](std::string_view s) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v == 0) {
      throw std::invalid_argument("bad order list '" + text + "'");
    }
    return v;
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::size_t lo = to_size(std::string_view(text).substr(0, dots));
    const std::size_t hi = to_size(std::string_view(text).substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("bad order range '" + text + "'");
    for (std::size_t m = lo; m <= hi; ++m) out.push_back(m);
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(to_size(std::string_view(text).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

struct FitOptions {
  std::string input;
  std::optional<std::string> column;
  std::string orders = "1..7";
  double eps = 0.001;
  double tol = 1e-6;
  std::uint64_t seed = 1;
  double threshold = 40.0;
  std::string out;
};

int run_fit(const FitOptions& o) {
  const gmix::LoadResult loaded = gmix::load_csv(o.input, o.column);
  std::cout << "retained " << loaded.retained << " observations, excluded " << loaded.excluded << '\n';
  gmix::EMConfig config;
  config.eps_penalty = o.eps;
  config.tol = o.tol;
  const fs::path dir(o.out);
  ensure_dir(dir);
  {
    auto out = open_out(dir / "summary.csv");
    gmix::write_summary(out, gmix::summarize(loaded.data));
  }
  const gmix::FitTable table = gmix::fit_orders(loaded.data, parse_orders(o.orders), config, o.seed, o.threshold);
  {
    auto out = open_out(dir / "fit_table.csv");
    gmix::write_fit_table(out, table);
  }
  for (const auto& rec : table.records) {
    auto out = open_out(dir / ("model_m" + std::to_string(rec.m) + ".txt"));
    out << gmix::to_record(rec.model()) << '\n';
    std::cout << "m=" << rec.m << " r=" << rec.r << " loglik=" << rec.log_likelihood
              << " modified=" << rec.modified_log_likelihood << '\n';
  }
  if (!table.likelihood_monotone()) std::cerr << "warning: log-likelihood decreased with m\n";
  std::cout << "recommended order: " << table.recommended << '\n';
  return 0;
}

struct SimulateOptions {
  std::string preset;
  double r = 5.0;
  std::size_t n = 240;
  std::size_t K = 200;
  std::uint64_t seed = 7;
  unsigned threads = 1;
  std::string out;
};

int run_simulate(const SimulateOptions& o) {
  const gmix::MixtureModel truth = o.preset == "model-I" ? gmix::model_one(o.r) : gmix::model_two(o.r);
  const gmix::ExperimentSpec spec{truth, o.n, o.K, o.seed, gmix::EMConfig{}};
  const gmix::ExperimentReport report = gmix::run_experiment(spec, o.threads);
  const fs::path dir(o.out);
  ensure_dir(dir);
  {
    auto out = open_out(dir / "summary.csv");
    gmix::write_summary_csv(out, report);
  }
  {
    auto out = open_out(dir / "replications.csv");
    gmix::write_replications_csv(out, report);
  }
  gmix::write_summary_csv(std::cout, report);
  if (report.excluded > 0) std::cerr << "warning: " << report.excluded << " replications excluded\n";
  return 0;
}

struct QqOptions {
  std::string input;
  std::optional<std::string> column;
  std::string model;
  std::size_t points = 100;
  std::string out;
};

int run_qq(const QqOptions& o) {
  const gmix::LoadResult loaded = gmix::load_csv(o.input, o.column);
  std::ifstream min(o.model);
  if (!min) throw IoError("cannot open '" + o.model + "'");
  std::string record((std::istreambuf_iterator<char>(min)), std::istreambuf_iterator<char>());
  const gmix::MixtureModel model = gmix::parse_record(record);
  auto out = open_out(o.out);
  gmix::write_qq_csv(out, gmix::qq_data(loaded.data, model, o.points));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural-shape Gamma mixture fitting"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit mixtures of several orders to a CSV column");
  fit_cmd->add_option("--input", fit.input, "CSV file of positive values")->required();
  fit_cmd->add_option("--column", fit.column, "Column name (required when several numeric columns exist)");
  fit_cmd->add_option("--orders", fit.orders, "Orders as LO..HI or a comma list")->capture_default_str();
  fit_cmd->add_option("--eps", fit.eps, "Weight penalty")->capture_default_str()->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--tol", fit.tol, "Stopping tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
  fit_cmd->add_option("--threshold", fit.threshold, "Log-likelihood gain needed per extra component")
      ->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Output directory")->required();

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo experiment on a built-in model");
  sim_cmd->add_option("--preset", sim.preset, "model-I or model-II")
      ->required()
      ->check(CLI::IsMember({"model-I", "model-II"}));
  sim_cmd->add_option("--r", sim.r, "Structural shape")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--n", sim.n, "Sample size")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--K", sim.K, "Replications")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();

  QqOptions qq;
  auto* qq_cmd = app.add_subcommand("qq", "Write log-scale QQ data for a fitted model");
  qq_cmd->add_option("--input", qq.input, "CSV file of positive values")->required();
  qq_cmd->add_option("--column", qq.column, "Column name");
  qq_cmd->add_option("--model", qq.model, "Model record file")->required();
  qq_cmd->add_option("--points", qq.points, "Number of quantile points")->capture_default_str()->check(CLI::PositiveNumber);
  qq_cmd->add_option("--out", qq.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*sim_cmd) return run_simulate(sim);
    if (*qq_cmd) return run_qq(qq);
  } catch (const gmix::CsvError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == gmix::CsvErrorCode::unreadable ? kExitIo : kExitParse;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const gmix::MultiStartError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const gmix::NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
