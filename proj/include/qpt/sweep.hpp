#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qpt/probe.hpp"

namespace qpt::sweep {

using measures::DistanceKind;
using measures::MeasureTag;

enum class BasisSpecKind { Computational, BellType2q, Theorem3Auto, ParityFourierAuto, Explicit };

struct BasisSpec {
  BasisSpecKind kind = BasisSpecKind::Computational;
  std::string path;  // Explicit only: file the columns were read from
  model::ComplexMatrix explicit_columns;

  std::string label() const;
};

struct MeasureSpec {
  MeasureTag tag = MeasureTag::CoherenceL1;
  DistanceKind dist = DistanceKind::HilbertSchmidt;  // GeometricCoherence only
  std::vector<int> split_side_a;                     // GeometricEntanglement only

  bool coherence_type() const;
  std::string name() const;
};

struct GridSpec {
  double lambda_min = 0.0;
  double lambda_max = 1.0;
  int points = 3;

  double spacing() const { return (lambda_max - lambda_min) / (points - 1); }
  double at(int i) const { return lambda_min + spacing() * i; }
};

struct SweepConfig {
  probe::ModelSystem system;
  model::CurveSpec curve;  // lambda range mirrors the grid
  GridSpec grid;
  std::vector<double> refinements = {1e-2, 5e-3, 2.5e-3};
  std::vector<MeasureSpec> measures;
  std::vector<BasisSpec> bases = {BasisSpec{}};
  DistanceKind line_element_dist = DistanceKind::Trace;
  double degeneracy_tol = states::kDefaultDegeneracyTol;
  int parallelism = 0;  // 0: hardware concurrency

  void validate() const;      // throws ConfigError
  std::string canonical() const;  // deterministic serialization for cache keys
};

struct ResultRow {
  double lambda = 0.0;
  double delta = 0.0;
  double h = 0.0;
  double beta = 0.0;  // +inf encodes the zero-temperature mode
  std::string measure;
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  bool crossing = false;
  bool overflow = false;
};

struct CriticalPointRecord {
  double lambda_c = 0.0;
  probe::Classification classification = probe::Classification::Finite;
  std::vector<std::string> detecting_measures;  // signals classified non-finite
  std::vector<std::pair<std::string, std::vector<double>>> scaling_ratios;
  std::optional<double> berry_jump;
  std::optional<double> order_parameter_jump;
  bool parity_flip = false;
  std::string note;  // auto-basis anchoring etc.
};

// Content-addressed store: one file per key (hex digest name), payload plus
// its checksum inside; corrupt entries read as misses. Writes go through a
// temp file and an atomic rename.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path dir);

  struct Value {
    double value = 0.0;
    bool crossing = false;
    bool overflow = false;
  };

  static std::string key(const std::string& config_canonical, const std::string& measure_label,
                         const std::string& basis_digest, double lambda, double dlambda);

  std::optional<Value> get(const std::string& key);
  void put(const std::string& key, const Value& value);

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::filesystem::path dir_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
  std::mutex mutex_;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  std::vector<CriticalPointRecord> criticals;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
};

// A measure paired with the concrete basis it runs in; label is what shows up
// in the CSV measure column.
struct ResolvedMeasure {
  std::string label;
  measures::MeasureKind kind;
  std::string basis_digest;  // empty when basis-free
};

// Candidate critical points located by the detection passes (line-element
// scan, parity-flip scan, per-measure jump scan) and sharpened by bisection.
struct Candidate {
  double lambda_c = 0.0;
  bool parity_flip = false;
  std::vector<std::string> sources;
};

std::vector<Candidate> detect_candidates(const probe::CurveContext& ctx,
                                         const SweepConfig& config);

std::vector<ResolvedMeasure> resolve_measures(const probe::CurveContext& ctx,
                                              const SweepConfig& config,
                                              const std::vector<Candidate>& candidates);

SweepResult run_sweep(const SweepConfig& config, ResultCache* cache = nullptr);

std::string emit_csv(const std::vector<ResultRow>& rows);
std::string emit_report(const SweepResult& result, const SweepConfig& config);

}  // namespace qpt::sweep
