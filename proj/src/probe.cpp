#include "qpt/probe.hpp"
#include <bit>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qpt::probe {

ComplexMatrix ModelSystem::build(const model::CurvePoint& pt, double lambda) const {
  switch (type) {
    case Type::XyTwoSpin:
      return model::build_xy_two_spin(pt.delta, pt.h);
    case Type::XyChain:
      return model::build_xy_chain(n_sites, pt.delta, pt.h, boundary);
    case Type::Pauli: {
      model::HamiltonianSpec spec;
      spec.n_sites = n_sites;
      spec.boundary = boundary;
      for (const auto& [coeff_expr, ops] : pauli_terms) {
        spec.terms.push_back({coeff_expr.evaluate(lambda), ops});
      }
      return model::build_hamiltonian(spec);
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown model type");
}

std::shared_ptr<const StateAtLambda> CurveContext::state_at(double lambda) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(lambda);
    if (it != cache_.end()) return it->second;
  }
  const model::CurvePoint pt = model::evaluate_curve(curve_, lambda);
  const ComplexMatrix ham = system_.build(pt, lambda);

  std::shared_ptr<StateAtLambda> out;
  if (pt.zero_temperature) {
    const states::GroundStateResult gs = states::ground_state(ham, degeneracy_tol_);
    out = std::make_shared<StateAtLambda>(StateAtLambda{
        lambda, pt, gs.degenerate, DensityMatrix::from_pure(gs.state), gs.state, gs.energy,
        gs.gap});
  } else {
    // Finite temperature: the crossing flag still reports ground degeneracy,
    // which is where the zero-T theorems stop applying.
    const states::GroundStateResult gs = states::ground_state(ham, degeneracy_tol_);
    out = std::make_shared<StateAtLambda>(StateAtLambda{
        lambda, pt, gs.degenerate, states::gibbs_state(ham, pt.beta), std::nullopt, gs.energy,
        gs.gap});
  }
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = cache_.emplace(lambda, std::move(out));
  (void)inserted;  // a racing thread may have filled it; first write wins
  return it->second;
}

namespace {

SusceptibilityEstimate make_estimate(double lambda, double dlambda, double value,
                                     EstimateKind kind, bool crossing) {
  SusceptibilityEstimate e{lambda, dlambda, value, kind, crossing, false};
  if (!std::isfinite(value)) {
    e.value = 0.0;
    e.overflow = true;
  }
  return e;
}

void require_positive_step(double dlambda) {
  if (!(dlambda > 0.0) || !std::isfinite(dlambda)) {
    throw Error(ErrorKind::OutOfRange, "step must be positive and finite");
  }
}

}  // namespace

SusceptibilityEstimate line_element_rate(const CurveContext& ctx, double lambda, double dlambda,
                                         DistanceKind dist) {
  require_positive_step(dlambda);
  const auto at = ctx.state_at(lambda);
  const auto ahead = ctx.state_at(lambda + dlambda);
  const double d = measures::distance(ahead->rho, at->rho, dist);
  return make_estimate(lambda, dlambda, d / dlambda, EstimateKind::LineElementFirst,
                       at->crossing || ahead->crossing);
}

SusceptibilityEstimate measure_susceptibility(const CurveContext& ctx, const MeasureKind& measure,
                                              double lambda, double dlambda) {
  require_positive_step(dlambda);
  const auto lo = ctx.state_at(lambda - dlambda);
  const auto hi = ctx.state_at(lambda + dlambda);
  const double m_lo = measures::evaluate_measure(measure, lo->rho, lo->pure());
  const double m_hi = measures::evaluate_measure(measure, hi->rho, hi->pure());
  return make_estimate(lambda, dlambda, (m_hi - m_lo) / (2.0 * dlambda),
                       EstimateKind::MeasureFirst, lo->crossing || hi->crossing);
}

SusceptibilityEstimate second_susceptibility(const CurveContext& ctx, const MeasureKind& measure,
                                             double lambda, double dlambda) {
  require_positive_step(dlambda);
  const auto lo = ctx.state_at(lambda - dlambda);
  const auto mid = ctx.state_at(lambda);
  const auto hi = ctx.state_at(lambda + dlambda);
  const double m_lo = measures::evaluate_measure(measure, lo->rho, lo->pure());
  const double m_mid = measures::evaluate_measure(measure, mid->rho, mid->pure());
  const double m_hi = measures::evaluate_measure(measure, hi->rho, hi->pure());
  return make_estimate(lambda, dlambda, (m_hi - 2.0 * m_mid + m_lo) / (dlambda * dlambda),
                       EstimateKind::MeasureSecond,
                       lo->crossing || mid->crossing || hi->crossing);
}

SusceptibilityEstimate line_element_second(const CurveContext& ctx, double lambda, double dlambda,
                                           DistanceKind dist) {
  require_positive_step(dlambda);
  const auto lo = ctx.state_at(lambda - dlambda);
  const auto mid = ctx.state_at(lambda);
  const auto hi = ctx.state_at(lambda + dlambda);
  const double fwd = measures::distance(hi->rho, mid->rho, dist);
  const double bwd = measures::distance(mid->rho, lo->rho, dist);
  return make_estimate(lambda, dlambda, (fwd - bwd) / (dlambda * dlambda),
                       EstimateKind::LineElementSecond,
                       lo->crossing || mid->crossing || hi->crossing);
}

const char* classification_name(Classification c) {
  switch (c) {
    case Classification::Finite: return "finite";
    case Classification::Divergent: return "divergent";
    case Classification::Cusp: return "cusp";
  }
  return "?";
}

namespace {

// |v_next| / |v_prev| with the zero/zero convention of 1 (a flat profile is
// bounded, not divergent).
double safe_ratio(double prev, double next, double scale) {
  const double tiny = 1e-12 * std::max(1.0, scale);
  const double ap = std::abs(prev), an = std::abs(next);
  if (ap <= tiny && an <= tiny) return 1.0;
  if (ap <= tiny) return std::numeric_limits<double>::infinity();
  return an / ap;
}

std::vector<double> ratios_of(const std::vector<SusceptibilityEstimate>& v) {
  double scale = 0.0;
  for (const auto& e : v) scale = std::max(scale, std::abs(e.value));
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    out.push_back(safe_ratio(v[i].value, v[i + 1].value, scale));
  }
  return out;
}

bool all_in(const std::vector<double>& xs, double lo, double hi) {
  for (double x : xs)
    if (!(x >= lo && x <= hi)) return false;
  return !xs.empty();
}

}  // namespace

DivergenceReport classify_divergence(const std::vector<SusceptibilityEstimate>& first,
                                     const std::vector<SusceptibilityEstimate>& second) {
  if (first.size() < 3) {
    throw Error(ErrorKind::InsufficientLevels, "need at least three refinement levels");
  }
  std::vector<SusceptibilityEstimate> f = first;
  std::sort(f.begin(), f.end(),
            [](const auto& a, const auto& b) { return a.dlambda > b.dlambda; });
  const double lambda0 = f.front().lambda;
  double refine = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (std::abs(f[i].lambda - lambda0) > 1e-12) {
      throw Error(ErrorKind::InsufficientLevels, "refinement levels disagree on lambda");
    }
    if (i > 0) {
      const double r = f[i - 1].dlambda / f[i].dlambda;
      if (!(r > 1.0)) {
        throw Error(ErrorKind::InsufficientLevels, "steps must strictly decrease");
      }
      refine = refine == 0.0 ? r : refine;
      if (std::abs(r - refine) > 0.05 * refine) {
        throw Error(ErrorKind::InsufficientLevels, "refinement factor must stay constant");
      }
    }
  }

  DivergenceReport report;
  report.lambda_candidate = lambda0;
  report.support = f;
  report.first_ratios = ratios_of(f);

  std::vector<SusceptibilityEstimate> s = second;
  std::sort(s.begin(), s.end(),
            [](const auto& a, const auto& b) { return a.dlambda > b.dlambda; });
  report.second_ratios = ratios_of(s);
  report.support.insert(report.support.end(), s.begin(), s.end());

  // [0.9 R, 1.1 R]: [1.8, 2.2] at the default halving refinement.
  const double div_lo = 0.9 * refine, div_hi = 1.1 * refine;
  if (all_in(report.first_ratios, div_lo, div_hi)) {
    report.classification = Classification::Divergent;
  } else if (all_in(report.first_ratios, 0.8, 1.2) && s.size() >= 3 &&
             all_in(report.second_ratios, div_lo, div_hi)) {
    report.classification = Classification::Cusp;
  } else {
    report.classification = Classification::Finite;
  }
  return report;
}

BerryPhaseResult berry_phase(const PureState& psi, const ComplexMatrix& generator) {
  num::require_hermitian(generator, 1e-12, "berry generator");
  if (generator.rows() != psi.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "generator does not match the state dimension");
  }
  const std::size_t n = psi.dimension();
  const num::EigenDecomposition ed = num::hermitian_eig(generator);

  // Components of psi in the generator eigenbasis; U(mu) psi is then a pure
  // phase twist of these.
  CVector w(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc{0.0, 0.0};
    for (std::size_t r = 0; r < n; ++r) acc += std::conj(ed.eigenvectors(r, k)) * psi.amplitude(r);
    w[k] = acc;
  }
  auto evolved = [&](double mu) {
    CVector u(n, Complex{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
      const Complex wk = std::polar(1.0, -mu * ed.eigenvalues[k]) * w[k];
      if (wk == Complex{0.0, 0.0}) continue;
      for (std::size_t r = 0; r < n; ++r) u[r] += ed.eigenvectors(r, k) * wk;
    }
    return u;
  };

  const CVector closed = evolved(2.0 * std::numbers::pi);
  double cyc = 0.0;
  for (std::size_t r = 0; r < n; ++r) cyc = std::max(cyc, std::abs(closed[r] - psi.amplitude(r)));
  if (cyc > 1e-8) {
    throw Error(ErrorKind::NotCyclic, "U(2pi) does not return the state to itself");
  }

  BerryPhaseResult out;
  out.analytic =
      2.0 * std::numbers::pi *
      num::inner(psi.amplitudes(), num::mat_vec(generator, psi.amplitudes())).real();

  // i <psi| U^dag dU/dmu |psi> with dU/dmu = -i O U reduces to <u|O|u>;
  // composite Simpson over 10^4 panels.
  constexpr int kPanels = 10000;
  const double hstep = 2.0 * std::numbers::pi / kPanels;
  auto integrand = [&](double mu) {
    const CVector u = evolved(mu);
    return num::inner(u, num::mat_vec(generator, u)).real();
  };
  double acc = integrand(0.0) + integrand(2.0 * std::numbers::pi);
  for (int i = 1; i < kPanels; ++i) {
    acc += (i % 2 == 1 ? 4.0 : 2.0) * integrand(hstep * i);
  }
  out.integrated = acc * hstep / 3.0;
  return out;
}

double order_parameter_expectation(const PureState& psi, const ComplexMatrix& observable) {
  num::require_hermitian(observable, 1e-12, "order parameter");
  if (observable.rows() != psi.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "observable does not match the state dimension");
  }
  return num::inner(psi.amplitudes(), num::mat_vec(observable, psi.amplitudes())).real();
}

namespace {

// Gram-Schmidt completion of `vecs` to `target` vectors inside the span of
// `pool` candidates (canonical order keeps the result deterministic).
void complete_with(std::vector<CVector>& vecs, std::size_t target,
                   const std::vector<CVector>& pool) {
  for (double accept_tol : {1e-6, 1e-12}) {
    for (const CVector& cand : pool) {
      if (vecs.size() >= target) return;
      CVector w = cand;
      for (const auto& f : vecs) {
        const Complex ov = num::inner(f, w);
        for (std::size_t r = 0; r < w.size(); ++r) w[r] -= ov * f[r];
      }
      const double wn = num::norm2(w);
      if (wn > accept_tol) {
        for (auto& x : w) x /= wn;
        vecs.push_back(std::move(w));
      }
    }
    if (vecs.size() >= target) return;
  }
  throw Error(ErrorKind::DimensionMismatch, "basis completion failed");
}

std::vector<CVector> canonical_pool(std::size_t dim) {
  std::vector<CVector> pool(dim, CVector(dim, Complex{0.0, 0.0}));
  for (std::size_t i = 0; i < dim; ++i) pool[i][i] = 1.0;
  return pool;
}

}  // namespace

IncoherentBasis theorem3_basis(const PureState& psi_before, const PureState& psi_after) {
  const std::size_t n = psi_before.dimension();
  if (n != psi_after.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "states live in different dimensions");
  }
  const Complex overlap = num::inner(psi_before.amplitudes(), psi_after.amplitudes());
  const double mag = std::abs(overlap);
  if (mag > 1.0 - 1e-10) {
    throw Error(ErrorKind::IdenticalStates, "states coincide up to phase");
  }

  std::vector<CVector> basis;
  basis.push_back(psi_before.amplitudes());

  if (mag <= 1e-10) {
    // Orthogonal branch: spread psi_after over two basis vectors so it cannot
    // be incoherent in the result. Impossible for qubits.
    if (n < 3) {
      throw Error(ErrorKind::DimensionTooSmall,
                  "orthogonal branch needs dimension >= 3");
    }
    // Scrub the residual overlap so the basis is exactly orthonormal.
    CVector after = psi_after.amplitudes();
    const Complex ov = num::inner(basis[0], after);
    for (std::size_t r = 0; r < n; ++r) after[r] -= ov * basis[0][r];
    const double an = num::norm2(after);
    for (auto& x : after) x /= an;

    // w: unit vector orthogonal to both states, canonical Gram-Schmidt pick.
    std::vector<CVector> aux{basis[0], after};
    complete_with(aux, 3, canonical_pool(n));
    const CVector& w = aux[2];

    CVector e1(n), e2(n);
    const double inv = 1.0 / std::sqrt(2.0);
    for (std::size_t r = 0; r < n; ++r) {
      e1[r] = (after[r] + w[r]) * inv;
      e2[r] = (after[r] - w[r]) * inv;
    }
    basis.push_back(std::move(e1));
    basis.push_back(std::move(e2));
  } else {
    // Partial overlap: e1 completes psi_after inside span{e0, e1}.
    CVector e1 = psi_after.amplitudes();
    for (std::size_t r = 0; r < n; ++r) e1[r] -= overlap * basis[0][r];
    const double nn = num::norm2(e1);
    for (auto& x : e1) x /= nn;
    basis.push_back(std::move(e1));
  }

  complete_with(basis, n, canonical_pool(n));
  return IncoherentBasis::from_vectors(basis);
}

IncoherentBasis parity_fourier_basis(int n_sites, const PureState& psi_before,
                                     const PureState& psi_after) {
  const std::size_t dim = std::size_t{1} << n_sites;
  if (psi_before.dimension() != dim || psi_after.dimension() != dim) {
    throw Error(ErrorKind::DimensionMismatch, "states do not match the site count");
  }

  auto parity_of = [&](const PureState& psi) {
    double exp_p = 0.0;
    for (std::size_t x = 0; x < dim; ++x) {
      const double sign = (std::popcount(x) % 2 == 0) ? 1.0 : -1.0;
      exp_p += sign * std::norm(psi.amplitude(x));
    }
    return exp_p;
  };
  const double pb = parity_of(psi_before);
  const double pa = parity_of(psi_after);
  if (std::abs(std::abs(pb) - 1.0) > 1e-8 || std::abs(std::abs(pa) - 1.0) > 1e-8) {
    throw Error(ErrorKind::NotParityEigenstates,
                "states are not parity eigenvectors within 1e-8");
  }
  if (pb * pa > 0.0) {
    throw Error(ErrorKind::SameParity, "states share a parity sector");
  }

  // Project each state into its sector exactly; the discarded weight is
  // bounded by the 1e-8 eigenvector tolerance.
  auto sector_project = [&](const PureState& psi, bool even) {
    CVector v = psi.amplitudes();
    for (std::size_t x = 0; x < dim; ++x) {
      const bool x_even = std::popcount(x) % 2 == 0;
      if (x_even != even) v[x] = Complex{0.0, 0.0};
    }
    const double nn = num::norm2(v);
    for (auto& x : v) x /= nn;
    return v;
  };
  auto sector_pool = [&](bool even) {
    std::vector<CVector> pool;
    for (std::size_t x = 0; x < dim; ++x) {
      if ((std::popcount(x) % 2 == 0) == even) {
        CVector e(dim, Complex{0.0, 0.0});
        e[x] = 1.0;
        pool.push_back(std::move(e));
      }
    }
    return pool;
  };

  const bool before_even = pb > 0.0;
  const std::size_t half = dim / 2;

  // Before-sector: the state itself plus canonical completion.
  std::vector<CVector> before_vecs{sector_project(psi_before, before_even)};
  complete_with(before_vecs, half, sector_pool(before_even));

  // After-sector: anchored orthonormal set, then the discrete Fourier mix
  // e'_{m'} = sum_m exp(-2 pi i m m' / M) / sqrt(M) e_m.
  std::vector<CVector> anchored{sector_project(psi_after, !before_even)};
  complete_with(anchored, half, sector_pool(!before_even));
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(half));
  std::vector<CVector> mixed(half, CVector(dim, Complex{0.0, 0.0}));
  for (std::size_t mp = 0; mp < half; ++mp) {
    for (std::size_t m = 0; m < half; ++m) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(m * mp) /
                           static_cast<double>(half);
      const Complex f = std::polar(inv_sqrt, angle);
      for (std::size_t r = 0; r < dim; ++r) mixed[mp][r] += f * anchored[m][r];
    }
  }

  std::vector<CVector> basis = std::move(before_vecs);
  for (auto& v : mixed) basis.push_back(std::move(v));
  return IncoherentBasis::from_vectors(basis);
}

BoundCheck verify_theorem1_bound(const CurveContext& ctx, const MeasureKind& measure,
                                 double lambda, double dlambda, DistanceKind dist) {
  require_positive_step(dlambda);
  const auto at = ctx.state_at(lambda);
  const auto ahead = ctx.state_at(lambda + dlambda);
  const auto before = measures::nonclassicality_distance_form(measure, at->rho, at->pure());
  const auto after = measures::nonclassicality_distance_form(measure, ahead->rho, ahead->pure());
  if (before.dist != dist) {
    throw Error(ErrorKind::IncompatibleMeasure,
                "measure is not induced by the requested distance");
  }
  BoundCheck out;
  out.lhs = std::abs(after.value - before.value);
  out.rhs = measures::distance(ahead->rho, at->rho, dist);
  return out;
}

}  // namespace qpt::probe
