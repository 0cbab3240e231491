#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "qpt/sweep.hpp"

using namespace qpt;
using namespace qpt::sweep;

namespace {

SweepConfig radial_config(double theta, int points = 101) {
  SweepConfig cfg;
  cfg.system.type = probe::ModelSystem::Type::XyTwoSpin;
  cfg.system.n_sites = 2;
  char buf[64];
  std::snprintf(buf, sizeof buf, "lambda*sin(%.17g)", theta);
  cfg.curve.delta_expr = expr::parse_expression(buf);
  std::snprintf(buf, sizeof buf, "lambda*cos(%.17g)", theta);
  cfg.curve.h_expr = expr::parse_expression(buf);
  cfg.curve.lambda_min = 0.5;
  cfg.curve.lambda_max = 1.5;
  cfg.grid = {0.5, 1.5, points};
  MeasureSpec m;
  m.tag = MeasureTag::CoherenceL1;
  cfg.measures = {m};
  cfg.parallelism = 2;
  return cfg;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* tag) {
    path = std::filesystem::temp_directory_path() / (std::string("qpt-test-") + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("run_sweep: radial curve finds exactly the r = 1 point, divergent") {
  const SweepConfig cfg = radial_config(std::numbers::pi / 4.0);
  const SweepResult res = run_sweep(cfg);

  REQUIRE(res.criticals.size() == 1);
  CHECK(std::abs(res.criticals[0].lambda_c - 1.0) <= 0.01);
  CHECK(res.criticals[0].classification == probe::Classification::Divergent);

  // rows: one per grid point and measure, sorted by lambda then measure
  CHECK(res.rows.size() == 101);
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    CHECK(res.rows[i - 1].lambda <= res.rows[i].lambda);
  }

  // berry and order-parameter jumps at the crossing
  REQUIRE(res.criticals[0].berry_jump.has_value());
  const double want_berry = 2.0 * std::numbers::pi * std::cos(std::numbers::pi / 4.0);
  CHECK(std::abs(*res.criticals[0].berry_jump - want_berry) <= 0.05 * want_berry);
  REQUIRE(res.criticals[0].order_parameter_jump.has_value());
  CHECK(*res.criticals[0].order_parameter_jump > 1e-3);
  CHECK(res.criticals[0].parity_flip);
}

TEST_CASE("run_sweep: entanglement is blind at h = 0 while theorem3 coherence detects") {
  SweepConfig cfg;
  cfg.system.type = probe::ModelSystem::Type::XyTwoSpin;
  cfg.system.n_sites = 2;
  cfg.curve.delta_expr = expr::parse_expression("lambda");
  cfg.curve.h_expr = expr::parse_expression("0");
  cfg.curve.lambda_min = 0.5;
  cfg.curve.lambda_max = 1.5;
  cfg.grid = {0.5, 1.5, 101};
  MeasureSpec ent;
  ent.tag = MeasureTag::GeometricEntanglement;
  MeasureSpec coh;
  coh.tag = MeasureTag::CoherenceL1;
  cfg.measures = {ent, coh};
  BasisSpec t3;
  t3.kind = BasisSpecKind::Theorem3Auto;
  cfg.bases = {t3};
  cfg.parallelism = 2;

  const SweepResult res = run_sweep(cfg);
  REQUIRE(res.criticals.size() == 1);
  const auto& crit = res.criticals[0];
  CHECK(std::abs(crit.lambda_c - 1.0) <= 0.01);
  CHECK(crit.classification == probe::Classification::Divergent);

  bool entanglement_detects = false, theorem3_detects = false;
  for (const auto& m : crit.detecting_measures) {
    if (m.find("geometric_entanglement") != std::string::npos) entanglement_detects = true;
    if (m.find("theorem3_auto") != std::string::npos) theorem3_detects = true;
  }
  CHECK_FALSE(entanglement_detects);
  CHECK(theorem3_detects);

  // the berry and order-parameter jumps vanish here, so coherence detection
  // is a strict superset of what those signals see
  if (crit.berry_jump) CHECK(*crit.berry_jump <= 1e-8);
  if (crit.order_parameter_jump) CHECK(*crit.order_parameter_jump <= 1e-8);
}

TEST_CASE("run_sweep: superset property, coherence detections cover berry/order signals") {
  for (double theta : {std::numbers::pi / 4.0, std::numbers::pi / 2.0}) {
    SweepConfig cfg = radial_config(theta, 51);
    BasisSpec t3;
    t3.kind = BasisSpecKind::Theorem3Auto;
    cfg.bases.push_back(t3);
    const SweepResult res = run_sweep(cfg);
    for (const auto& crit : res.criticals) {
      const bool berry_or_order =
          (crit.berry_jump && *crit.berry_jump > 1e-6) ||
          (crit.order_parameter_jump && *crit.order_parameter_jump > 1e-6);
      if (!berry_or_order) continue;
      bool coherence_detects = false;
      for (const auto& m : crit.detecting_measures) {
        if (m.find("coherence") != std::string::npos) coherence_detects = true;
      }
      CHECK(coherence_detects);
    }
  }
}

TEST_CASE("run_sweep: refinement monotonicity at the detected step") {
  const SweepConfig cfg = radial_config(std::numbers::pi / 3.0, 51);
  model::CurveSpec curve = cfg.curve;
  curve.lambda_min = 0.4;
  curve.lambda_max = 1.6;
  const probe::CurveContext ctx(cfg.system, std::move(curve));
  const auto comp = std::make_shared<states::IncoherentBasis>(
      states::IncoherentBasis::computational(4));
  measures::MeasureKind kind;
  kind.tag = MeasureTag::CoherenceL1;
  kind.basis = comp;
  double prev = 0.0;
  for (double dl : cfg.refinements) {
    const double mag = std::abs(probe::measure_susceptibility(ctx, kind, 1.0, dl).value);
    CHECK(mag > prev);
    prev = mag;
  }
}

TEST_CASE("run_sweep: N=4 chain sweep reports the parity flip at h = 0.8") {
  SweepConfig cfg;
  cfg.system.type = probe::ModelSystem::Type::XyChain;
  cfg.system.n_sites = 4;
  cfg.system.boundary = model::Boundary::Periodic;
  cfg.curve.delta_expr = expr::parse_expression("0.6");
  cfg.curve.h_expr = expr::parse_expression("lambda");
  cfg.curve.lambda_min = 0.6;
  cfg.curve.lambda_max = 1.0;
  cfg.grid = {0.6, 1.0, 21};
  MeasureSpec coh;
  coh.tag = MeasureTag::CoherenceL1;
  cfg.measures = {coh};
  BasisSpec pf;
  pf.kind = BasisSpecKind::ParityFourierAuto;
  cfg.bases = {pf};
  cfg.parallelism = 2;

  const SweepResult res = run_sweep(cfg);
  REQUIRE(res.criticals.size() == 1);
  CHECK(std::abs(res.criticals[0].lambda_c - 0.8) <= 0.02);
  CHECK(res.criticals[0].parity_flip);
  CHECK(res.criticals[0].classification == probe::Classification::Divergent);

  const std::string report = emit_report(res, cfg);
  CHECK(report.find("\"parity_flip\": true") != std::string::npos);
}

TEST_CASE("run_sweep: config validation failures") {
  SweepConfig cfg = radial_config(std::numbers::pi / 4.0);
  cfg.measures.clear();
  CHECK_THROWS_AS(run_sweep(cfg), Error);  // empty measure list

  SweepConfig bad_grid = radial_config(std::numbers::pi / 4.0);
  bad_grid.grid.points = 2;
  CHECK_THROWS_AS(run_sweep(bad_grid), Error);

  SweepConfig bad_refine = radial_config(std::numbers::pi / 4.0);
  bad_refine.refinements = {1e-2, 1e-2, 5e-3};  // not strictly decreasing
  CHECK_THROWS_AS(run_sweep(bad_refine), Error);
}

TEST_CASE("emit_csv: format contract") {
  ResultRow row;
  row.lambda = 1.0;
  row.delta = std::sqrt(0.5);
  row.h = std::sqrt(0.5);
  row.beta = std::numeric_limits<double>::infinity();
  row.measure = "coherence_l1[computational]";
  row.value = 0.123456789012345;
  row.d1 = -1.5;
  row.d2 = 0.0;
  row.crossing = true;

  const std::string csv = emit_csv({row});
  // exactly two lines: header plus one row
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.rfind("lambda,delta,h,beta,measure,value,d1,d2,flags\n", 0) == 0);
  CHECK(csv.find("crossing") != std::string::npos);

  // 12-significant-digit round trip: parsing a field and reprinting it at 12
  // digits reproduces the emitted bytes
  const std::string line = csv.substr(csv.find('\n') + 1);
  double lam, del, hh, val, d1, d2;
  char meas[64], beta_txt[16], flags[32];
  const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%15[^,],%63[^,],%lf,%lf,%lf,%31s",
                              &lam, &del, &hh, beta_txt, meas, &val, &d1, &d2, flags);
  CHECK(got == 9);
  char reprinted[40];
  std::snprintf(reprinted, sizeof reprinted, "%.12g", val);
  CHECK(line.find(std::string(",") + reprinted + ",") != std::string::npos);
  CHECK(std::string(beta_txt) == "inf");
  CHECK(std::string(flags) == "crossing");

  CHECK_THROWS_AS(emit_csv({}), Error);
}

TEST_CASE("emit_report: empty critical list renders as an empty array") {
  SweepConfig cfg = radial_config(std::numbers::pi / 4.0, 11);
  // restrict the grid to the smooth side so nothing is detected
  cfg.grid = {1.1, 1.5, 11};
  cfg.curve.lambda_min = 1.1;
  cfg.curve.lambda_max = 1.5;
  const SweepResult res = run_sweep(cfg);
  CHECK(res.criticals.empty());
  const std::string report = emit_report(res, cfg);
  CHECK(report.find("\"critical_points\": []") != std::string::npos);
}

TEST_CASE("result cache: keys, hits, corruption") {
  TempDir dir("cache");
  ResultCache cache(dir.path);

  const std::string k1 = ResultCache::key("cfg", "m", "b", 1.0, 0.0);
  const std::string k2 = ResultCache::key("cfg", "m", "b", 1.0, 1e-2);  // changed step
  const std::string k3 = ResultCache::key("cfg", "m", "b2", 1.0, 0.0);  // changed basis
  CHECK(k1 != k2);
  CHECK(k1 != k3);
  CHECK(k1.size() == 64);

  CHECK_FALSE(cache.get(k1).has_value());
  cache.put(k1, {0.75, true, false});
  const auto v = cache.get(k1);
  REQUIRE(v.has_value());
  CHECK(v->value == 0.75);  // bit-exact round trip
  CHECK(v->crossing);
  CHECK_FALSE(v->overflow);

  // corrupt the entry: checksum fails, read degrades to a miss
  {
    std::ofstream out(dir.path / k1, std::ios::trunc);
    out << "v1 0000000000000000 0 0\n0123456789\n";
  }
  CHECK_FALSE(cache.get(k1).has_value());

  // re-put repairs it
  cache.put(k1, {0.75, true, false});
  CHECK(cache.get(k1).has_value());
}

TEST_CASE("run_sweep: warm cache reproduces rows bit-identically with 100% hits") {
  TempDir dir("cache-rows");
  SweepConfig cfg = radial_config(std::numbers::pi / 4.0, 21);

  std::string cold_csv, warm_csv;
  {
    ResultCache cache(dir.path);
    const SweepResult cold = run_sweep(cfg, &cache);
    cold_csv = emit_csv(cold.rows);
    CHECK(cold.cache_hits == 0);
    CHECK(cold.cache_misses == cold.rows.size());
  }
  {
    ResultCache cache(dir.path);
    const SweepResult warm = run_sweep(cfg, &cache);
    warm_csv = emit_csv(warm.rows);
    CHECK(warm.cache_hits == warm.rows.size());
    CHECK(warm.cache_misses == 0);
  }
  CHECK(cold_csv == warm_csv);
}
