#include "qpt/model.hpp"

#include <cmath>

namespace qpt::model {

namespace {

ComplexMatrix pauli_matrix(PauliAxis axis) {
  ComplexMatrix m(2, 2);
  switch (axis) {
    case PauliAxis::X:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case PauliAxis::Y:
      m(0, 1) = Complex{0.0, -1.0};
      m(1, 0) = Complex{0.0, 1.0};
      break;
    case PauliAxis::Z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
  }
  return m;
}

ComplexMatrix pauli_string(int n_sites, const PauliTerm& term) {
  std::vector<PauliAxis> axis(static_cast<std::size_t>(n_sites), PauliAxis::X);
  std::vector<bool> used(static_cast<std::size_t>(n_sites) + 1, false);
  std::vector<bool> active(static_cast<std::size_t>(n_sites) + 1, false);
  for (const auto& [site, ax] : term.ops) {
    if (site < 1 || site > n_sites) {
      throw Error(ErrorKind::OutOfRange, "pauli term site index out of range");
    }
    if (used[static_cast<std::size_t>(site)]) {
      throw Error(ErrorKind::OutOfRange, "pauli term repeats a site");
    }
    used[static_cast<std::size_t>(site)] = true;
    active[static_cast<std::size_t>(site)] = true;
    axis[static_cast<std::size_t>(site) - 1] = ax;
  }
  ComplexMatrix acc(1, 1);
  acc(0, 0) = 1.0;
  for (int site = 1; site <= n_sites; ++site) {
    const ComplexMatrix factor = active[static_cast<std::size_t>(site)]
                                     ? pauli_matrix(axis[static_cast<std::size_t>(site) - 1])
                                     : ComplexMatrix::identity(2);
    acc = num::kron(acc, factor);
  }
  return acc;
}

}  // namespace

ComplexMatrix build_hamiltonian(const HamiltonianSpec& spec) {
  if (spec.n_sites < 1) throw Error(ErrorKind::OutOfRange, "need at least one site");
  if (spec.n_sites > kMaxSites) {
    throw Error(ErrorKind::DimensionTooLarge, "dense build limited to 12 sites");
  }
  const std::size_t dim = std::size_t{1} << spec.n_sites;
  ComplexMatrix h(dim, dim);
  for (const auto& term : spec.terms) {
    ComplexMatrix m = pauli_string(spec.n_sites, term);
    m *= Complex{term.coefficient, 0.0};
    h += m;
  }
  h.require_finite("hamiltonian");
  return h;
}

ComplexMatrix build_xy_two_spin(double delta, double h) {
  if (!std::isfinite(delta) || !std::isfinite(h)) {
    throw Error(ErrorKind::ExpressionError, "non-finite model parameters");
  }
  HamiltonianSpec spec;
  spec.n_sites = 2;
  spec.terms = {
      {-(1.0 + delta) / 2.0, {{1, PauliAxis::X}, {2, PauliAxis::X}}},
      {-(1.0 - delta) / 2.0, {{1, PauliAxis::Y}, {2, PauliAxis::Y}}},
      {-h / 2.0, {{1, PauliAxis::Z}}},
      {-h / 2.0, {{2, PauliAxis::Z}}},
  };
  return build_hamiltonian(spec);
}

HamiltonianSpec xy_chain_spec(int n_sites, double delta, double h, Boundary boundary) {
  if (n_sites < 2) throw Error(ErrorKind::OutOfRange, "chain needs at least two sites");
  if (n_sites > kMaxSites) {
    throw Error(ErrorKind::DimensionTooLarge, "dense build limited to 12 sites");
  }
  if (!std::isfinite(delta) || !std::isfinite(h)) {
    throw Error(ErrorKind::ExpressionError, "non-finite model parameters");
  }
  HamiltonianSpec spec;
  spec.n_sites = n_sites;
  spec.boundary = boundary;
  const int last_bond = boundary == Boundary::Periodic ? n_sites : n_sites - 1;
  for (int j = 1; j <= last_bond; ++j) {
    const int jn = j == n_sites ? 1 : j + 1;
    spec.terms.push_back({-(1.0 + delta) / 4.0, {{j, PauliAxis::X}, {jn, PauliAxis::X}}});
    spec.terms.push_back({-(1.0 - delta) / 4.0, {{j, PauliAxis::Y}, {jn, PauliAxis::Y}}});
  }
  for (int j = 1; j <= n_sites; ++j) {
    spec.terms.push_back({-h / 2.0, {{j, PauliAxis::Z}}});
  }
  return spec;
}

ComplexMatrix build_xy_chain(int n_sites, double delta, double h, Boundary boundary) {
  return build_hamiltonian(xy_chain_spec(n_sites, delta, h, boundary));
}

ComplexMatrix parity_operator(int n_sites) {
  if (n_sites < 1) throw Error(ErrorKind::OutOfRange, "parity needs at least one site");
  if (n_sites > kMaxSites) {
    throw Error(ErrorKind::DimensionTooLarge, "dense build limited to 12 sites");
  }
  ComplexMatrix acc(1, 1);
  acc(0, 0) = 1.0;
  const ComplexMatrix z = pauli_matrix(PauliAxis::Z);
  for (int j = 0; j < n_sites; ++j) acc = num::kron(acc, z);
  return acc;
}

ComplexMatrix magnetization_z(int n_sites, double scale) {
  HamiltonianSpec spec;
  spec.n_sites = n_sites;
  for (int j = 1; j <= n_sites; ++j) spec.terms.push_back({scale, {{j, PauliAxis::Z}}});
  return build_hamiltonian(spec);
}

bool CurveSpec::in_range(double lambda) const {
  const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lambda_min), std::abs(lambda_max)));
  return lambda >= lambda_min - slack && lambda <= lambda_max + slack;
}

CurvePoint evaluate_curve(const CurveSpec& curve, double lambda) {
  if (!curve.in_range(lambda)) {
    throw Error(ErrorKind::OutOfRange, "lambda outside curve range");
  }
  CurvePoint p;
  p.delta = curve.delta_expr.evaluate(lambda);
  p.h = curve.h_expr.evaluate(lambda);
  if (curve.beta_expr.has_value()) {
    p.beta = curve.beta_expr->evaluate(lambda);
    p.zero_temperature = false;
    if (!(p.beta >= 0.0)) {
      throw Error(ErrorKind::ExpressionError, "beta expression must stay >= 0");
    }
  }
  if (!std::isfinite(p.delta) || !std::isfinite(p.h)) {
    throw Error(ErrorKind::ExpressionError, "curve produced non-finite parameters");
  }
  return p;
}

}  // namespace qpt::model
