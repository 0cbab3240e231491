// Command-line front end: scan / measure / report / selftest.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "qpt/config.hpp"
#include "qpt/selftest.hpp"
#include "qpt/sweep.hpp"

namespace {

namespace fs = std::filesystem;
using qpt::Error;
using qpt::ErrorKind;

constexpr const char* kCacheEnvVar = "QPT_CACHE_DIR";

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::ConfigError:
    case ErrorKind::SyntaxError:
    case ErrorKind::UnknownIdentifier:
    case ErrorKind::IoError:
      return 2;
    default:
      return 1;
  }
}

std::unique_ptr<qpt::sweep::ResultCache> open_cache(const std::string& cache_flag,
                                                    bool no_cache) {
  if (no_cache) return nullptr;
  std::string dir = cache_flag;
  if (dir.empty()) {
    if (const char* env = std::getenv(kCacheEnvVar)) dir = env;
  }
  if (dir.empty()) return nullptr;
  return std::make_unique<qpt::sweep::ResultCache>(fs::path(dir));
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_scan(const std::string& config_path, const std::string& out_flag,
             const std::string& cache_flag, bool no_cache, int parallelism) {
  qpt::config::ParsedConfig parsed = qpt::config::load_config_file(config_path);
  if (parallelism > 0) parsed.sweep.parallelism = parallelism;

  auto cache = open_cache(cache_flag, no_cache);
  const qpt::sweep::SweepResult result =
      qpt::sweep::run_sweep(parsed.sweep, cache.get());

  const fs::path out_dir = out_flag.empty() ? fs::path(parsed.out_dir) : fs::path(out_flag);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create output directory " + out_dir.string());

  write_file(out_dir / "rows.csv", qpt::sweep::emit_csv(result.rows));
  write_file(out_dir / "report.json", qpt::sweep::emit_report(result, parsed.sweep));
  write_file(out_dir / "config.qpt", read_file(config_path));

  std::cout << "wrote " << (out_dir / "rows.csv").string() << " (" << result.rows.size()
            << " rows)\n";
  std::cout << "wrote " << (out_dir / "report.json").string() << " ("
            << result.criticals.size() << " critical points)\n";
  if (cache) {
    std::cout << "cache: " << result.cache_hits << " hits, " << result.cache_misses
              << " misses\n";
  }
  return 0;
}

int run_measure(const std::string& config_path, double lambda, int parallelism) {
  qpt::config::ParsedConfig parsed = qpt::config::load_config_file(config_path);
  qpt::sweep::SweepConfig& cfg = parsed.sweep;
  if (parallelism > 0) cfg.parallelism = parallelism;
  cfg.validate();
  if (!(lambda >= cfg.grid.lambda_min && lambda <= cfg.grid.lambda_max)) {
    throw Error(ErrorKind::ConfigError, "--lambda outside the configured grid range");
  }

  qpt::model::CurveSpec curve = cfg.curve;
  curve.lambda_min = cfg.grid.lambda_min - 2.0 * cfg.grid.spacing();
  curve.lambda_max = cfg.grid.lambda_max + 2.0 * cfg.grid.spacing();
  qpt::probe::CurveContext ctx(cfg.system, std::move(curve), cfg.degeneracy_tol);

  bool needs_candidates = false;
  for (const auto& b : cfg.bases) {
    needs_candidates |= b.kind == qpt::sweep::BasisSpecKind::Theorem3Auto ||
                        b.kind == qpt::sweep::BasisSpecKind::ParityFourierAuto;
  }
  const std::vector<qpt::sweep::Candidate> candidates =
      needs_candidates ? qpt::sweep::detect_candidates(ctx, cfg)
                       : std::vector<qpt::sweep::Candidate>{};
  const auto instances = qpt::sweep::resolve_measures(ctx, cfg, candidates);

  const auto st = ctx.state_at(lambda);
  const double dl = cfg.refinements.back();
  std::vector<qpt::sweep::ResultRow> rows;
  for (const auto& rm : instances) {
    qpt::sweep::ResultRow row;
    row.lambda = lambda;
    row.delta = st->point.delta;
    row.h = st->point.h;
    row.beta = st->point.zero_temperature ? std::numeric_limits<double>::infinity()
                                          : st->point.beta;
    row.measure = rm.label;
    row.crossing = st->crossing;
    try {
      row.value = qpt::measures::evaluate_measure(rm.kind, st->rho, st->pure());
      row.d1 = qpt::probe::measure_susceptibility(ctx, rm.kind, lambda, dl).value;
      row.d2 = qpt::probe::second_susceptibility(ctx, rm.kind, lambda, dl).value;
    } catch (const Error&) {
      row.overflow = true;
    }
    rows.push_back(std::move(row));
  }
  std::cout << qpt::sweep::emit_csv(rows);
  return 0;
}

int run_report(const std::string& run_dir) {
  std::cout << read_file(fs::path(run_dir) / "report.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometric nonclassicality scanner for quantum phase transitions"};
  app.require_subcommand(1);

  std::string config_path, out_flag, cache_flag, run_dir;
  bool no_cache = false;
  int parallelism = 0;
  double lambda = 0.0;

  auto* scan = app.add_subcommand("scan", "sweep the lambda grid, write rows.csv + report.json");
  scan->add_option("config", config_path, "config file")->required();
  scan->add_option("--out", out_flag, "output directory (default: output.out_dir)");
  scan->add_option("--parallelism", parallelism, "worker threads (default: hardware)");
  scan->add_option("--cache", cache_flag, "result cache directory");
  scan->add_flag("--no-cache", no_cache, "disable the result cache");

  auto* measure = app.add_subcommand("measure", "evaluate all configured measures at one lambda");
  measure->add_option("config", config_path, "config file")->required();
  measure->add_option("--lambda", lambda, "parameter value")->required();
  measure->add_option("--parallelism", parallelism, "worker threads");

  auto* report = app.add_subcommand("report", "re-render the report of a finished run");
  report->add_option("run-dir", run_dir, "directory written by scan")->required();

  app.add_subcommand("selftest", "run the built-in ground-truth suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (scan->parsed()) return run_scan(config_path, out_flag, cache_flag, no_cache, parallelism);
    if (measure->parsed())
      return run_measure(config_path, lambda, parallelism);
    if (report->parsed()) return run_report(run_dir);
    // selftest
    const auto results = qpt::selftest::run_all(std::cout);
    return qpt::selftest::all_passed(results) ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
