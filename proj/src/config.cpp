#include "qpt/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace qpt::config {

namespace {

using sweep::BasisSpec;
using sweep::BasisSpecKind;
using sweep::MeasureSpec;

[[noreturn]] void fail(const std::string& what, int line = 0) {
  std::string msg = what;
  if (line > 0) msg += " (line " + std::to_string(line) + ")";
  throw Error(ErrorKind::ConfigError, msg);
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct Entry {
  std::string value;
  int line = 0;
};

struct Document {
  // scalar entries keyed section.key; repeatable keys collected in lists
  std::map<std::string, Entry> scalars;
  std::map<std::string, std::vector<Entry>> lists;
};

const bool kRepeatable = true;

struct KeyInfo {
  bool repeatable;
};

const std::map<std::string, KeyInfo>& known_keys() {
  static const std::map<std::string, KeyInfo> keys = {
      {"model.type", {}},          {"model.N", {}},
      {"model.boundary", {}},      {"model.term", {kRepeatable}},
      {"curve.delta", {}},         {"curve.h", {}},
      {"curve.beta", {}},          {"grid.lambda_min", {}},
      {"grid.lambda_max", {}},     {"grid.points", {}},
      {"grid.refine", {}},         {"grid.degeneracy_tol", {}},
      {"measures.measure", {kRepeatable}},
      {"measures.line_element", {}},
      {"bases.basis", {kRepeatable}},
      {"output.out_dir", {}},
  };
  return keys;
}

Document scan_document(const std::string& text) {
  static const std::vector<std::string> sections = {"model", "curve",    "grid",
                                                    "measures", "bases", "output"};
  Document doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), section) == sections.end()) {
        fail("unknown section [" + section + "]", line_no);
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value", line_no);
    if (section.empty()) fail("key outside of any section", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    const auto it = known_keys().find(full);
    if (it == known_keys().end()) {
      fail("unknown key '" + key + "' in [" + section + "]", line_no);
    }
    if (it->second.repeatable) {
      doc.lists[full].push_back({value, line_no});
    } else {
      if (doc.scalars.count(full)) fail("duplicate key '" + full + "'", line_no);
      doc.scalars[full] = {value, line_no};
    }
  }
  return doc;
}

std::string get_or(const Document& doc, const std::string& key, const std::string& fallback) {
  const auto it = doc.scalars.find(key);
  return it == doc.scalars.end() ? fallback : it->second.value;
}

Entry require(const Document& doc, const std::string& key) {
  const auto it = doc.scalars.find(key);
  if (it == doc.scalars.end()) fail("missing required key '" + key + "'");
  return it->second;
}

double parse_double(const std::string& text, const std::string& key, int line) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    fail("key '" + key + "' is not a number: '" + text + "'", line);
  }
  return v;
}

int parse_int(const std::string& text, const std::string& key, int line) {
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0') {
    fail("key '" + key + "' is not an integer: '" + text + "'", line);
  }
  return static_cast<int>(v);
}

expr::Expression parse_expr_value(const std::string& text, const std::string& key, int line) {
  try {
    return expr::parse_expression(text);
  } catch (const Error& e) {
    fail("key '" + key + "': " + e.what(), line);
  }
}

MeasureSpec parse_measure(const std::string& text, int line) {
  MeasureSpec spec;
  const std::size_t colon = text.find(':');
  const std::string head = colon == std::string::npos ? text : text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "coherence_l1") {
    spec.tag = sweep::MeasureTag::CoherenceL1;
  } else if (head == "coherence_relative_entropy") {
    spec.tag = sweep::MeasureTag::CoherenceRelativeEntropy;
  } else if (head == "geometric_coherence") {
    spec.tag = sweep::MeasureTag::GeometricCoherence;
    if (arg == "l1_entrywise") spec.dist = sweep::DistanceKind::L1Entrywise;
    else if (arg == "trace") spec.dist = sweep::DistanceKind::Trace;
    else if (arg == "hilbert_schmidt") spec.dist = sweep::DistanceKind::HilbertSchmidt;
    else fail("geometric_coherence needs :l1_entrywise, :trace or :hilbert_schmidt", line);
  } else if (head == "geometric_entanglement") {
    spec.tag = sweep::MeasureTag::GeometricEntanglement;
    if (!arg.empty()) {
      std::istringstream ss(arg);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        spec.split_side_a.push_back(parse_int(trim(tok), "measures.measure split", line));
      }
    }
  } else if (head == "geometric_discord_2q") {
    spec.tag = sweep::MeasureTag::GeometricDiscord2q;
  } else {
    fail("unknown measure '" + head + "'", line);
  }
  if (head != "geometric_coherence" && head != "geometric_entanglement" && !arg.empty()) {
    fail("measure '" + head + "' takes no argument", line);
  }
  return spec;
}

model::ComplexMatrix load_basis_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read basis file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ss(t);
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    if (!vals.empty()) rows.push_back(std::move(vals));
  }
  const std::size_t d = rows.size();
  if (d == 0) throw Error(ErrorKind::ConfigError, "basis file is empty: " + path);
  model::ComplexMatrix m(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    if (rows[k].size() != 2 * d) {
      throw Error(ErrorKind::ConfigError,
                  "basis file line " + std::to_string(k + 1) + " needs " + std::to_string(2 * d) +
                      " numbers (re im per component): " + path);
    }
    // line k holds basis vector k; store it as column k
    for (std::size_t r = 0; r < d; ++r) {
      m(r, k) = num::Complex{rows[k][2 * r], rows[k][2 * r + 1]};
    }
  }
  return m;
}

BasisSpec parse_basis(const std::string& text, int line) {
  BasisSpec spec;
  if (text == "computational") {
    spec.kind = BasisSpecKind::Computational;
  } else if (text == "bell_type_2q") {
    spec.kind = BasisSpecKind::BellType2q;
  } else if (text == "theorem3_auto") {
    spec.kind = BasisSpecKind::Theorem3Auto;
  } else if (text == "parity_fourier_auto") {
    spec.kind = BasisSpecKind::ParityFourierAuto;
  } else if (text.rfind("explicit:", 0) == 0) {
    spec.kind = BasisSpecKind::Explicit;
    spec.path = text.substr(9);
    spec.explicit_columns = load_basis_matrix(spec.path);
  } else {
    fail("unknown basis '" + text + "'", line);
  }
  return spec;
}

std::pair<expr::Expression, std::vector<std::pair<int, model::PauliAxis>>> parse_term(
    const std::string& text, int line) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string::npos) fail("term needs the form '<coeff-expr> : <ops>'", line);
  expr::Expression coeff = parse_expr_value(trim(text.substr(0, colon)), "model.term", line);
  std::vector<std::pair<int, model::PauliAxis>> ops;
  std::istringstream ss(text.substr(colon + 1));
  std::string tok;
  while (ss >> tok) {
    if (tok.size() < 2) fail("term op '" + tok + "' must look like x1, y2, z3", line);
    model::PauliAxis axis;
    switch (std::tolower(static_cast<unsigned char>(tok[0]))) {
      case 'x': axis = model::PauliAxis::X; break;
      case 'y': axis = model::PauliAxis::Y; break;
      case 'z': axis = model::PauliAxis::Z; break;
      default: fail("term op '" + tok + "' must start with x, y or z", line);
    }
    ops.emplace_back(parse_int(tok.substr(1), "model.term site", line), axis);
  }
  if (ops.empty()) fail("term has no operators", line);
  return {std::move(coeff), std::move(ops)};
}

}  // namespace

ParsedConfig parse_config(const std::string& text) {
  const Document doc = scan_document(text);
  ParsedConfig out;
  sweep::SweepConfig& cfg = out.sweep;

  // [model]
  const std::string type = get_or(doc, "model.type", "xy_chain");
  if (type == "xy_chain") cfg.system.type = probe::ModelSystem::Type::XyChain;
  else if (type == "xy_two_spin") cfg.system.type = probe::ModelSystem::Type::XyTwoSpin;
  else if (type == "pauli") cfg.system.type = probe::ModelSystem::Type::Pauli;
  else fail("model.type must be xy_chain, xy_two_spin or pauli");
  {
    const auto it = doc.scalars.find("model.N");
    cfg.system.n_sites =
        it == doc.scalars.end() ? 2 : parse_int(it->second.value, "model.N", it->second.line);
  }
  if (cfg.system.n_sites < 1 || cfg.system.n_sites > model::kMaxSites) {
    fail("model.N must lie in [1, 12]");
  }
  const std::string boundary = get_or(doc, "model.boundary", "periodic");
  if (boundary == "periodic") cfg.system.boundary = model::Boundary::Periodic;
  else if (boundary == "open") cfg.system.boundary = model::Boundary::Open;
  else fail("model.boundary must be periodic or open");
  if (const auto it = doc.lists.find("model.term"); it != doc.lists.end()) {
    if (cfg.system.type != probe::ModelSystem::Type::Pauli) {
      fail("model.term is only valid with model.type = pauli", it->second.front().line);
    }
    for (const auto& entry : it->second) {
      cfg.system.pauli_terms.push_back(parse_term(entry.value, entry.line));
    }
  } else if (cfg.system.type == probe::ModelSystem::Type::Pauli) {
    fail("model.type = pauli needs at least one model.term");
  }

  // [curve]
  {
    const Entry d = require(doc, "curve.delta");
    cfg.curve.delta_expr = parse_expr_value(d.value, "curve.delta", d.line);
    const Entry h = require(doc, "curve.h");
    cfg.curve.h_expr = parse_expr_value(h.value, "curve.h", h.line);
    const std::string beta = get_or(doc, "curve.beta", "zero-temperature");
    if (beta != "zero-temperature") {
      const auto it = doc.scalars.find("curve.beta");
      cfg.curve.beta_expr = parse_expr_value(beta, "curve.beta", it->second.line);
    }
  }

  // [grid]
  {
    const Entry lo = require(doc, "grid.lambda_min");
    const Entry hi = require(doc, "grid.lambda_max");
    const Entry pts = require(doc, "grid.points");
    cfg.grid.lambda_min = parse_double(lo.value, "grid.lambda_min", lo.line);
    cfg.grid.lambda_max = parse_double(hi.value, "grid.lambda_max", hi.line);
    cfg.grid.points = parse_int(pts.value, "grid.points", pts.line);
    cfg.curve.lambda_min = cfg.grid.lambda_min;
    cfg.curve.lambda_max = cfg.grid.lambda_max;
    if (const auto it = doc.scalars.find("grid.refine"); it != doc.scalars.end()) {
      cfg.refinements.clear();
      std::istringstream ss(it->second.value);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        cfg.refinements.push_back(parse_double(trim(tok), "grid.refine", it->second.line));
      }
    }
    if (const auto it = doc.scalars.find("grid.degeneracy_tol"); it != doc.scalars.end()) {
      cfg.degeneracy_tol = parse_double(it->second.value, "grid.degeneracy_tol", it->second.line);
    }
  }

  // [measures]
  {
    const auto it = doc.lists.find("measures.measure");
    if (it == doc.lists.end()) fail("missing required key 'measures.measure'");
    for (const auto& entry : it->second) {
      cfg.measures.push_back(parse_measure(entry.value, entry.line));
    }
    const std::string ld = get_or(doc, "measures.line_element", "trace");
    if (ld == "trace") cfg.line_element_dist = sweep::DistanceKind::Trace;
    else if (ld == "l1_entrywise") cfg.line_element_dist = sweep::DistanceKind::L1Entrywise;
    else if (ld == "hilbert_schmidt") cfg.line_element_dist = sweep::DistanceKind::HilbertSchmidt;
    else fail("measures.line_element must be l1_entrywise, trace or hilbert_schmidt");
  }

  // [bases]
  if (const auto it = doc.lists.find("bases.basis"); it != doc.lists.end()) {
    cfg.bases.clear();
    for (const auto& entry : it->second) {
      cfg.bases.push_back(parse_basis(entry.value, entry.line));
    }
  }

  // [output]
  out.out_dir = get_or(doc, "output.out_dir", "out");

  cfg.validate();
  return out;
}

ParsedConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace qpt::config
