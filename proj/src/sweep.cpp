#include "qpt/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <thread>

#include <json.hpp>

#include "qpt/sha256.hpp"

namespace qpt::sweep {

namespace {

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string double_bits_hex(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits));
  return buf;
}

bool double_from_bits_hex(const std::string& s, double* out) {
  if (s.size() != 16) return false;
  std::uint64_t bits = 0;
  for (char c : s) {
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else return false;
    bits = (bits << 4) | static_cast<std::uint64_t>(v);
  }
  std::memcpy(out, &bits, sizeof bits);
  return true;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

const char* basis_kind_name(BasisSpecKind kind) {
  switch (kind) {
    case BasisSpecKind::Computational: return "computational";
    case BasisSpecKind::BellType2q: return "bell_type_2q";
    case BasisSpecKind::Theorem3Auto: return "theorem3_auto";
    case BasisSpecKind::ParityFourierAuto: return "parity_fourier_auto";
    case BasisSpecKind::Explicit: return "explicit";
  }
  return "?";
}

std::string matrix_digest(const model::ComplexMatrix& m) {
  std::string blob;
  blob.reserve(m.entries().size() * 32 + 16);
  blob += std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ":";
  for (const auto& e : m.entries()) {
    blob += double_bits_hex(e.real());
    blob += double_bits_hex(e.imag());
  }
  return sha256_hex(blob);
}

}  // namespace

std::string BasisSpec::label() const {
  if (kind == BasisSpecKind::Explicit) return std::string("explicit:") + path;
  return basis_kind_name(kind);
}

bool MeasureSpec::coherence_type() const {
  return tag == MeasureTag::CoherenceL1 || tag == MeasureTag::CoherenceRelativeEntropy ||
         tag == MeasureTag::GeometricCoherence;
}

std::string MeasureSpec::name() const {
  measures::MeasureKind k;
  k.tag = tag;
  k.dist = dist;
  return k.name();
}

void SweepConfig::validate() const {
  if (grid.points < 3) throw Error(ErrorKind::ConfigError, "grid.points must be at least 3");
  if (!(grid.lambda_max > grid.lambda_min)) {
    throw Error(ErrorKind::ConfigError, "grid.lambda_max must exceed grid.lambda_min");
  }
  if (measures.empty()) throw Error(ErrorKind::ConfigError, "measures: no measure configured");
  if (refinements.size() < 3) {
    throw Error(ErrorKind::ConfigError, "grid.refine needs at least three steps");
  }
  for (std::size_t i = 0; i < refinements.size(); ++i) {
    if (!(refinements[i] > 0.0)) {
      throw Error(ErrorKind::ConfigError, "grid.refine steps must be positive");
    }
    if (refinements[i] > grid.spacing() * (1.0 + 1e-12)) {
      throw Error(ErrorKind::ConfigError, "grid.refine steps must not exceed the grid spacing");
    }
    if (i > 0 && !(refinements[i] < refinements[i - 1])) {
      throw Error(ErrorKind::ConfigError, "grid.refine steps must strictly decrease");
    }
  }
  const bool zero_temp = !curve.beta_expr.has_value();
  const std::size_t dim = system.dimension();
  if (system.type == probe::ModelSystem::Type::XyTwoSpin && system.n_sites != 2) {
    throw Error(ErrorKind::ConfigError, "model.N must be 2 for the two-spin model");
  }
  for (const auto& m : measures) {
    if (m.tag == MeasureTag::GeometricEntanglement) {
      if (!zero_temp) {
        throw Error(ErrorKind::ConfigError,
                    "measures.measure: geometric_entanglement needs zero temperature");
      }
      if (!m.split_side_a.empty()) {
        num::Bipartition split{system.n_sites, m.split_side_a};
        split.validate();
      }
    }
    if (m.tag == MeasureTag::GeometricDiscord2q && dim != 4) {
      throw Error(ErrorKind::ConfigError,
                  "measures.measure: geometric_discord_2q needs a two-qubit model");
    }
  }
  bool has_coherence = false;
  for (const auto& m : measures) has_coherence |= m.coherence_type();
  for (const auto& b : bases) {
    if (b.kind == BasisSpecKind::BellType2q && dim != 4) {
      throw Error(ErrorKind::ConfigError, "bases.basis: bell_type_2q needs a two-qubit model");
    }
    if ((b.kind == BasisSpecKind::Theorem3Auto || b.kind == BasisSpecKind::ParityFourierAuto) &&
        !zero_temp) {
      throw Error(ErrorKind::ConfigError, "bases.basis: auto bases need zero temperature");
    }
    if (b.kind == BasisSpecKind::Explicit &&
        (b.explicit_columns.rows() != dim || b.explicit_columns.cols() != dim)) {
      throw Error(ErrorKind::ConfigError, "bases.basis: explicit basis dimension mismatch");
    }
  }
  if (has_coherence && bases.empty()) {
    throw Error(ErrorKind::ConfigError, "bases: coherence measures need at least one basis");
  }
}

std::string SweepConfig::canonical() const {
  std::string out = "qpt-sweep-v1\n";
  out += "model.type=";
  switch (system.type) {
    case probe::ModelSystem::Type::XyTwoSpin: out += "xy_two_spin"; break;
    case probe::ModelSystem::Type::XyChain: out += "xy_chain"; break;
    case probe::ModelSystem::Type::Pauli: out += "pauli"; break;
  }
  out += ";N=" + std::to_string(system.n_sites);
  out += ";boundary=";
  out += system.boundary == model::Boundary::Periodic ? "periodic" : "open";
  std::vector<std::string> terms;
  for (const auto& [coeff, ops] : system.pauli_terms) {
    std::string t = coeff.to_string() + ":";
    for (const auto& [site, axis] : ops) {
      t += axis == model::PauliAxis::X ? 'x' : (axis == model::PauliAxis::Y ? 'y' : 'z');
      t += std::to_string(site);
    }
    terms.push_back(std::move(t));
  }
  std::sort(terms.begin(), terms.end());
  for (const auto& t : terms) out += ";term=" + t;
  out += "\ncurve.delta=" + curve.delta_expr.to_string();
  out += "\ncurve.h=" + curve.h_expr.to_string();
  out += "\ncurve.beta=";
  out += curve.beta_expr ? curve.beta_expr->to_string() : "zero-temperature";
  out += "\ngrid=" + double_bits_hex(grid.lambda_min) + "," + double_bits_hex(grid.lambda_max) +
         "," + std::to_string(grid.points);
  out += "\nrefine=";
  for (double r : refinements) out += double_bits_hex(r) + ",";
  out += "\nline_dist=";
  out += measures::distance_name(line_element_dist);
  out += "\ndtol=" + double_bits_hex(degeneracy_tol);
  std::vector<std::string> ms;
  for (const auto& m : measures) {
    std::string s = m.name();
    for (int site : m.split_side_a) s += ":" + std::to_string(site);
    ms.push_back(std::move(s));
  }
  std::sort(ms.begin(), ms.end());
  out += "\nmeasures=";
  for (const auto& s : ms) out += s + ";";
  std::vector<std::string> bs;
  for (const auto& b : bases) {
    std::string s = b.label();
    if (b.kind == BasisSpecKind::Explicit) s += ":" + matrix_digest(b.explicit_columns);
    bs.push_back(std::move(s));
  }
  std::sort(bs.begin(), bs.end());
  out += "\nbases=";
  for (const auto& s : bs) out += s + ";";
  out += "\n";
  return out;
}

ResultCache::ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create cache directory " + dir_.string());
}

std::string ResultCache::key(const std::string& config_canonical,
                             const std::string& measure_label, const std::string& basis_digest,
                             double lambda, double dlambda) {
  std::string blob = config_canonical;
  blob += "\nmeasure=" + measure_label;
  blob += "\nbasis=" + basis_digest;
  blob += "\nlambda=" + double_bits_hex(lambda);
  blob += "\ndlambda=" + double_bits_hex(dlambda);
  return sha256_hex(blob);
}

std::optional<ResultCache::Value> ResultCache::get(const std::string& key) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto path = dir_ / key;
  std::ifstream in(path);
  if (!in) {
    ++misses_;
    return std::nullopt;
  }
  std::string payload, checksum;
  std::getline(in, payload);
  std::getline(in, checksum);
  // A corrupt entry is just a miss; the writer will repair it.
  if (checksum != sha256_hex(payload)) {
    ++misses_;
    return std::nullopt;
  }
  char tag[16] = {0};
  char bits[24] = {0};
  int crossing = 0, overflow = 0;
  if (std::sscanf(payload.c_str(), "%8s %17s %d %d", tag, bits, &crossing, &overflow) != 4 ||
      std::strcmp(tag, "v1") != 0) {
    ++misses_;
    return std::nullopt;
  }
  Value v;
  if (!double_from_bits_hex(bits, &v.value)) {
    ++misses_;
    return std::nullopt;
  }
  v.crossing = crossing != 0;
  v.overflow = overflow != 0;
  ++hits_;
  return v;
}

void ResultCache::put(const std::string& key, const Value& value) {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::string payload = std::string("v1 ") + double_bits_hex(value.value) + " " +
                              (value.crossing ? "1" : "0") + " " + (value.overflow ? "1" : "0");
  const auto tmp = dir_ / (key + ".tmp");
  const auto final_path = dir_ / key;
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write cache entry " + tmp.string());
    out << payload << "\n" << sha256_hex(payload) << "\n";
  }
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot commit cache entry " + final_path.string());
}

namespace {

double parity_expectation(const states::DensityMatrix& rho) {
  double acc = 0.0;
  for (std::size_t x = 0; x < rho.dimension(); ++x) {
    const double sign = std::popcount(x) % 2 == 0 ? 1.0 : -1.0;
    acc += sign * rho.matrix()(x, x).real();
  }
  return acc;
}

// Candidate detection threshold: a jump has to clear both an absolute floor
// and a multiple of the typical grid-step variation.
bool is_outlier(double jump, double median_jump) {
  return jump > std::max(1e-6, 8.0 * median_jump);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

// Narrow a bracketing interval around a state discontinuity by following the
// larger trace-distance half.
double bisect_jump(const probe::CurveContext& ctx, double a, double b, DistanceKind dist,
                   double target_width) {
  while (b - a > target_width) {
    const double m = 0.5 * (a + b);
    const double left = measures::distance(ctx.state_at(a)->rho, ctx.state_at(m)->rho, dist);
    const double right = measures::distance(ctx.state_at(m)->rho, ctx.state_at(b)->rho, dist);
    if (left >= right) {
      b = m;
    } else {
      a = m;
    }
  }
  return 0.5 * (a + b);
}

measures::MeasureKind resolved_kind(const MeasureSpec& spec, int n_sites,
                                    std::shared_ptr<const states::IncoherentBasis> basis) {
  measures::MeasureKind kind;
  kind.tag = spec.tag;
  kind.dist = spec.dist;
  kind.basis = std::move(basis);
  if (spec.tag == MeasureTag::GeometricEntanglement) {
    std::vector<int> side = spec.split_side_a;
    if (side.empty()) {
      for (int s = 1; s <= n_sites / 2; ++s) side.push_back(s);
    }
    kind.split = num::Bipartition{n_sites, std::move(side)};
  }
  return kind;
}

}  // namespace

std::vector<Candidate> detect_candidates(const probe::CurveContext& ctx,
                                         const SweepConfig& config) {
  const int points = config.grid.points;
  const double spacing = config.grid.spacing();

  std::vector<std::shared_ptr<const probe::StateAtLambda>> states(
      static_cast<std::size_t>(points));
  parallel_for(static_cast<std::size_t>(points), config.parallelism,
               [&](std::size_t i) { states[i] = ctx.state_at(config.grid.at(static_cast<int>(i))); });

  struct IntervalHit {
    std::vector<std::string> sources;
    bool parity_flip = false;
    double strength = 0.0;
  };
  std::map<int, IntervalHit> hits;

  // Pass 1: line-element scan over whole grid intervals.
  std::vector<double> jumps(static_cast<std::size_t>(points - 1));
  for (int i = 0; i + 1 < points; ++i) {
    jumps[static_cast<std::size_t>(i)] = measures::distance(
        states[static_cast<std::size_t>(i)]->rho, states[static_cast<std::size_t>(i + 1)]->rho,
        config.line_element_dist);
  }
  const double med_jump = median_of(jumps);
  for (int i = 0; i + 1 < points; ++i) {
    const double j = jumps[static_cast<std::size_t>(i)];
    if (is_outlier(j, med_jump)) {
      auto& hit = hits[i];
      hit.sources.push_back("line_element");
      hit.strength = std::max(hit.strength, j);
    }
  }

  // Pass 2: parity-flip scan.
  for (int i = 0; i + 1 < points; ++i) {
    const double pa = parity_expectation(states[static_cast<std::size_t>(i)]->rho);
    const double pb = parity_expectation(states[static_cast<std::size_t>(i + 1)]->rho);
    if (std::abs(pa) > 0.2 && std::abs(pb) > 0.2 && pa * pb < 0.0) {
      auto& hit = hits[i];
      hit.sources.push_back("parity_flip");
      hit.parity_flip = true;
      hit.strength = std::max(hit.strength, jumps[static_cast<std::size_t>(i)]);
    }
  }

  // Pass 3: per-measure jump scan in the statically resolvable bases.
  std::vector<ResolvedMeasure> static_measures = resolve_measures(ctx, config, {});
  for (const auto& rm : static_measures) {
    std::vector<double> values(static_cast<std::size_t>(points));
    bool usable = true;
    for (int i = 0; i < points && usable; ++i) {
      try {
        const auto& st = *states[static_cast<std::size_t>(i)];
        values[static_cast<std::size_t>(i)] = measures::evaluate_measure(rm.kind, st.rho, st.pure());
      } catch (const Error&) {
        usable = false;
      }
    }
    if (!usable) continue;
    std::vector<double> deltas(static_cast<std::size_t>(points - 1));
    for (int i = 0; i + 1 < points; ++i) {
      deltas[static_cast<std::size_t>(i)] =
          std::abs(values[static_cast<std::size_t>(i + 1)] - values[static_cast<std::size_t>(i)]);
    }
    const double med = median_of(deltas);
    for (int i = 0; i + 1 < points; ++i) {
      if (is_outlier(deltas[static_cast<std::size_t>(i)], med)) {
        auto& hit = hits[i];
        hit.sources.push_back(rm.label);
        hit.strength = std::max(hit.strength, deltas[static_cast<std::size_t>(i)]);
      }
    }
  }

  // Bisect each flagged interval, then merge candidates closer than one grid
  // spacing (keeping the stronger one's location).
  const double min_refine = config.refinements.back();
  std::vector<std::pair<Candidate, double>> raw;
  for (const auto& [interval, hit] : hits) {
    Candidate c;
    c.lambda_c = bisect_jump(ctx, config.grid.at(interval), config.grid.at(interval + 1),
                             config.line_element_dist, min_refine / 2.0);
    c.parity_flip = hit.parity_flip;
    c.sources = hit.sources;
    std::sort(c.sources.begin(), c.sources.end());
    c.sources.erase(std::unique(c.sources.begin(), c.sources.end()), c.sources.end());
    raw.emplace_back(std::move(c), hit.strength);
  }
  std::sort(raw.begin(), raw.end(),
            [](const auto& a, const auto& b) { return a.first.lambda_c < b.first.lambda_c; });
  std::vector<std::pair<Candidate, double>> merged;
  for (auto& entry : raw) {
    if (!merged.empty() && entry.first.lambda_c - merged.back().first.lambda_c <= spacing) {
      auto& keep = merged.back();
      if (entry.second > keep.second) {
        std::swap(keep.first.lambda_c, entry.first.lambda_c);
        keep.second = entry.second;
      }
      keep.first.parity_flip |= entry.first.parity_flip;
      for (auto& s : entry.first.sources) keep.first.sources.push_back(s);
      std::sort(keep.first.sources.begin(), keep.first.sources.end());
      keep.first.sources.erase(std::unique(keep.first.sources.begin(), keep.first.sources.end()),
                               keep.first.sources.end());
    } else {
      merged.push_back(std::move(entry));
    }
  }
  std::vector<Candidate> out;
  out.reserve(merged.size());
  for (auto& m : merged) out.push_back(std::move(m.first));
  return out;
}

std::vector<ResolvedMeasure> resolve_measures(const probe::CurveContext& ctx,
                                              const SweepConfig& config,
                                              const std::vector<Candidate>& candidates) {
  const std::size_t dim = config.system.dimension();
  const double min_refine = config.refinements.back();

  struct NamedBasis {
    std::string label;
    std::shared_ptr<const states::IncoherentBasis> basis;
    std::string digest;
  };
  std::vector<NamedBasis> named;
  for (const auto& spec : config.bases) {
    switch (spec.kind) {
      case BasisSpecKind::Computational:
        named.push_back({spec.label(),
                         std::make_shared<states::IncoherentBasis>(
                             states::IncoherentBasis::computational(dim)),
                         "computational:" + std::to_string(dim)});
        break;
      case BasisSpecKind::BellType2q:
        named.push_back({spec.label(),
                         std::make_shared<states::IncoherentBasis>(
                             states::IncoherentBasis::bell_type_2q()),
                         "bell_type_2q"});
        break;
      case BasisSpecKind::Explicit: {
        auto basis = std::make_shared<states::IncoherentBasis>(spec.explicit_columns);
        named.push_back({spec.label(), std::move(basis), matrix_digest(spec.explicit_columns)});
        break;
      }
      case BasisSpecKind::Theorem3Auto:
      case BasisSpecKind::ParityFourierAuto: {
        // One instance per candidate, anchored on the ground states just
        // before and after the located crossing.
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          const double lc = candidates[c].lambda_c;
          try {
            const auto before = ctx.state_at(lc - min_refine);
            const auto after = ctx.state_at(lc + min_refine);
            if (!before->psi || !after->psi) break;
            states::IncoherentBasis basis =
                spec.kind == BasisSpecKind::Theorem3Auto
                    ? probe::theorem3_basis(*before->psi, *after->psi)
                    : probe::parity_fourier_basis(config.system.n_sites, *before->psi,
                                                  *after->psi);
            const std::string label = spec.label() + "#" + std::to_string(c);
            const std::string digest = matrix_digest(basis.columns());
            named.push_back({label,
                             std::make_shared<states::IncoherentBasis>(std::move(basis)),
                             digest});
          } catch (const Error&) {
            // No valid construction at this candidate (identical states,
            // mixed parity, ...): the basis is simply skipped.
          }
        }
        break;
      }
    }
  }

  std::vector<ResolvedMeasure> out;
  for (const auto& spec : config.measures) {
    if (spec.coherence_type()) {
      for (const auto& nb : named) {
        out.push_back({spec.name() + "[" + nb.label + "]",
                       resolved_kind(spec, config.system.n_sites, nb.basis), nb.digest});
      }
    } else {
      out.push_back({spec.name(), resolved_kind(spec, config.system.n_sites, nullptr), ""});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const ResolvedMeasure& a, const ResolvedMeasure& b) { return a.label < b.label; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const ResolvedMeasure& a, const ResolvedMeasure& b) {
                          return a.label == b.label;
                        }),
            out.end());
  return out;
}

namespace {

struct JumpPair {
  std::optional<double> berry;
  std::optional<double> order;
  bool parity_flip = false;
};

JumpPair side_jumps(const probe::CurveContext& ctx, const SweepConfig& config, double lambda_c) {
  JumpPair out;
  const double dl = config.refinements.back();
  const auto before = ctx.state_at(lambda_c - dl);
  const auto after = ctx.state_at(lambda_c + dl);
  const double pb = parity_expectation(before->rho);
  const double pa = parity_expectation(after->rho);
  out.parity_flip = std::abs(pb) > 0.2 && std::abs(pa) > 0.2 && pb * pa < 0.0;
  if (!before->psi || !after->psi) return out;

  const model::ComplexMatrix half_mag = model::magnetization_z(config.system.n_sites, 0.5);
  try {
    const auto phi_b = probe::berry_phase(*before->psi, half_mag);
    const auto phi_a = probe::berry_phase(*after->psi, half_mag);
    out.berry = std::abs(phi_a.analytic - phi_b.analytic);
  } catch (const Error&) {
    // NotCyclic for this generator (odd site counts); leave unset.
  }
  const model::ComplexMatrix mag = model::magnetization_z(config.system.n_sites, 1.0);
  out.order = std::abs(probe::order_parameter_expectation(*after->psi, mag) -
                       probe::order_parameter_expectation(*before->psi, mag));
  return out;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config, ResultCache* cache) {
  config.validate();

  // Give the curve two grid spacings of slack on each side: susceptibility
  // stencils at a candidate near the edge reach past the grid.
  model::CurveSpec curve = config.curve;
  curve.lambda_min = config.grid.lambda_min - 2.0 * config.grid.spacing();
  curve.lambda_max = config.grid.lambda_max + 2.0 * config.grid.spacing();
  probe::CurveContext ctx(config.system, std::move(curve), config.degeneracy_tol);

  const std::vector<Candidate> candidates = detect_candidates(ctx, config);
  const std::vector<ResolvedMeasure> instances = resolve_measures(ctx, config, candidates);
  const std::string canon = config.canonical();

  const int points = config.grid.points;
  const std::size_t n_rows = static_cast<std::size_t>(points) * instances.size();
  std::vector<ResultRow> rows(n_rows);

  parallel_for(n_rows, config.parallelism, [&](std::size_t task) {
    const std::size_t m = task / static_cast<std::size_t>(points);
    const int i = static_cast<int>(task % static_cast<std::size_t>(points));
    const double lambda = config.grid.at(i);
    const ResolvedMeasure& rm = instances[m];

    ResultRow row;
    row.lambda = lambda;
    row.measure = rm.label;

    const std::string key =
        cache ? ResultCache::key(canon, rm.label, rm.basis_digest, lambda, 0.0) : std::string();
    std::optional<ResultCache::Value> cached = cache ? cache->get(key) : std::nullopt;

    // The curve columns are expression evaluations; no state needed on a hit.
    const model::CurvePoint pt = model::evaluate_curve(ctx.curve(), lambda);
    row.delta = pt.delta;
    row.h = pt.h;
    row.beta = pt.zero_temperature ? std::numeric_limits<double>::infinity() : pt.beta;
    if (cached) {
      row.value = cached->value;
      row.crossing = cached->crossing;
      row.overflow = cached->overflow;
    } else {
      const auto st = ctx.state_at(lambda);
      row.crossing = st->crossing;
      try {
        row.value = measures::evaluate_measure(rm.kind, st->rho, st->pure());
        if (!std::isfinite(row.value)) {
          row.value = 0.0;
          row.overflow = true;
        }
      } catch (const Error&) {
        row.value = 0.0;
        row.overflow = true;
      }
      if (cache) cache->put(key, {row.value, row.crossing, row.overflow});
    }
    rows[task] = std::move(row);
  });

  // Grid-spacing finite differences per measure column; one-sided stencils at
  // the ends.
  const double dx = config.grid.spacing();
  for (std::size_t m = 0; m < instances.size(); ++m) {
    auto* col = rows.data() + m * static_cast<std::size_t>(points);
    for (int i = 0; i < points; ++i) {
      const auto v = [&](int k) { return col[k].value; };
      if (i == 0) {
        col[i].d1 = (v(1) - v(0)) / dx;
        col[i].d2 = (v(0) - 2.0 * v(1) + v(2)) / (dx * dx);
      } else if (i == points - 1) {
        col[i].d1 = (v(i) - v(i - 1)) / dx;
        col[i].d2 = (v(i - 2) - 2.0 * v(i - 1) + v(i)) / (dx * dx);
      } else {
        col[i].d1 = (v(i + 1) - v(i - 1)) / (2.0 * dx);
        col[i].d2 = (v(i + 1) - 2.0 * v(i) + v(i - 1)) / (dx * dx);
      }
    }
  }

  // Classification at each candidate: susceptibility refinement ladders per
  // measure plus the measure-independent line element.
  SweepResult result;
  for (const auto& cand : candidates) {
    CriticalPointRecord rec;
    rec.lambda_c = cand.lambda_c;
    rec.parity_flip = cand.parity_flip;

    bool any_divergent = false, any_cusp = false;

    {
      std::vector<probe::SusceptibilityEstimate> first, second;
      for (double dl : config.refinements) {
        first.push_back(probe::line_element_rate(ctx, cand.lambda_c, dl, config.line_element_dist));
        second.push_back(
            probe::line_element_second(ctx, cand.lambda_c, dl, config.line_element_dist));
      }
      const auto rep = probe::classify_divergence(first, second);
      const std::string label =
          std::string("line_element_") + measures::distance_name(config.line_element_dist);
      rec.scaling_ratios.emplace_back(label, rep.first_ratios);
      if (rep.classification == probe::Classification::Divergent) {
        any_divergent = true;
        rec.detecting_measures.push_back(label);
      } else if (rep.classification == probe::Classification::Cusp) {
        any_cusp = true;
        rec.detecting_measures.push_back(label);
      }
    }

    for (const auto& rm : instances) {
      try {
        std::vector<probe::SusceptibilityEstimate> first, second;
        for (double dl : config.refinements) {
          first.push_back(probe::measure_susceptibility(ctx, rm.kind, cand.lambda_c, dl));
          second.push_back(probe::second_susceptibility(ctx, rm.kind, cand.lambda_c, dl));
        }
        const auto rep = probe::classify_divergence(first, second);
        rec.scaling_ratios.emplace_back(rm.label, rep.first_ratios);
        if (rep.classification == probe::Classification::Divergent) {
          any_divergent = true;
          rec.detecting_measures.push_back(rm.label);
        } else if (rep.classification == probe::Classification::Cusp) {
          any_cusp = true;
          rec.detecting_measures.push_back(rm.label);
        }
      } catch (const Error&) {
        // measure not evaluable around this point; others still classify
      }
    }

    rec.classification = any_divergent ? probe::Classification::Divergent
                                       : (any_cusp ? probe::Classification::Cusp
                                                   : probe::Classification::Finite);
    if (rec.classification == probe::Classification::Finite && !rec.parity_flip) {
      continue;  // coarse-scan false positive
    }

    const JumpPair jumps = side_jumps(ctx, config, cand.lambda_c);
    rec.berry_jump = jumps.berry;
    rec.order_parameter_jump = jumps.order;
    rec.parity_flip = rec.parity_flip || jumps.parity_flip;
    std::string note = "sources:";
    for (const auto& s : cand.sources) note += " " + s;
    rec.note = note;
    result.criticals.push_back(std::move(rec));
  }

  // Deterministic row order: lambda ascending, then measure label.
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.measure < b.measure;
  });
  result.rows = std::move(rows);
  if (cache) {
    result.cache_hits = cache->hits();
    result.cache_misses = cache->misses();
  }
  return result;
}

std::string emit_csv(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw Error(ErrorKind::IoError, "no rows to emit");
  std::string out = "lambda,delta,h,beta,measure,value,d1,d2,flags\n";
  for (const auto& r : rows) {
    out += fmt12(r.lambda) + "," + fmt12(r.delta) + "," + fmt12(r.h) + "," + fmt12(r.beta) + ",";
    out += r.measure + ",";
    out += fmt12(r.value) + "," + fmt12(r.d1) + "," + fmt12(r.d2) + ",";
    if (r.crossing) out += "crossing";
    if (r.overflow) out += r.crossing ? ";overflow" : "overflow";
    out += "\n";
  }
  return out;
}

std::string emit_report(const SweepResult& result, const SweepConfig& config) {
  using ordered_json = nlohmann::ordered_json;
  ordered_json doc;
  doc["schema"] = "qpt-report-1";

  ordered_json model_doc;
  switch (config.system.type) {
    case probe::ModelSystem::Type::XyTwoSpin: model_doc["type"] = "xy_two_spin"; break;
    case probe::ModelSystem::Type::XyChain: model_doc["type"] = "xy_chain"; break;
    case probe::ModelSystem::Type::Pauli: model_doc["type"] = "pauli"; break;
  }
  model_doc["sites"] = config.system.n_sites;
  model_doc["boundary"] =
      config.system.boundary == model::Boundary::Periodic ? "periodic" : "open";
  doc["model"] = model_doc;

  ordered_json curve_doc;
  curve_doc["delta"] = config.curve.delta_expr.to_string();
  curve_doc["h"] = config.curve.h_expr.to_string();
  curve_doc["beta"] =
      config.curve.beta_expr ? config.curve.beta_expr->to_string() : "zero-temperature";
  doc["curve"] = curve_doc;

  ordered_json grid_doc;
  grid_doc["lambda_min"] = config.grid.lambda_min;
  grid_doc["lambda_max"] = config.grid.lambda_max;
  grid_doc["points"] = config.grid.points;
  doc["grid"] = grid_doc;
  doc["refinements"] = config.refinements;
  doc["line_element_distance"] = measures::distance_name(config.line_element_dist);

  std::vector<std::string> measure_labels;
  for (const auto& r : result.rows) {
    if (measure_labels.empty() || measure_labels.back() != r.measure) {
      measure_labels.push_back(r.measure);
    }
  }
  std::sort(measure_labels.begin(), measure_labels.end());
  measure_labels.erase(std::unique(measure_labels.begin(), measure_labels.end()),
                       measure_labels.end());
  doc["measures"] = measure_labels;

  ordered_json cache_doc;
  cache_doc["hits"] = result.cache_hits;
  cache_doc["misses"] = result.cache_misses;
  doc["cache"] = cache_doc;

  ordered_json crits = ordered_json::array();
  for (const auto& c : result.criticals) {
    ordered_json cd;
    cd["lambda_c"] = c.lambda_c;
    cd["classification"] = probe::classification_name(c.classification);
    cd["parity_flip"] = c.parity_flip;
    cd["detecting_measures"] = c.detecting_measures;
    ordered_json ratios;
    for (const auto& [label, rs] : c.scaling_ratios) ratios[label] = rs;
    cd["scaling_ratios"] = ratios;
    if (c.berry_jump) {
      cd["berry_phase_jump"] = *c.berry_jump;
    } else {
      cd["berry_phase_jump"] = nullptr;
    }
    if (c.order_parameter_jump) {
      cd["order_parameter_jump"] = *c.order_parameter_jump;
    } else {
      cd["order_parameter_jump"] = nullptr;
    }
    cd["note"] = c.note;
    crits.push_back(cd);
  }
  doc["critical_points"] = crits;
  return doc.dump(2) + "\n";
}

}  // namespace qpt::sweep
