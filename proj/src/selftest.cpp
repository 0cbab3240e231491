#include "qpt/selftest.hpp"
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "qpt/config.hpp"
#include "qpt/sweep.hpp"

namespace qpt::selftest {

namespace {

using measures::DistanceKind;
using measures::MeasureKind;
using measures::MeasureTag;
using model::ComplexMatrix;
using num::Bipartition;
using num::Complex;
using num::CVector;
using states::DensityMatrix;
using states::IncoherentBasis;
using states::PureState;

constexpr double kPi = std::numbers::pi;

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
  void expect_close(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: got %.12g, want %.12g (tol %.1e)", what.c_str(), got,
                    want, tol);
      expect(false, buf);
    }
  }
  void expect_le(double got, double bound, const std::string& what) {
    if (!(got <= bound)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: %.12g exceeds %.12g", what.c_str(), got, bound);
      expect(false, buf);
    }
  }
};

PureState two_spin_ground(double delta, double h) {
  return states::ground_state(model::build_xy_two_spin(delta, h)).state;
}

probe::CurveContext radial_two_spin(double theta, double lo, double hi) {
  probe::ModelSystem sys;
  sys.type = probe::ModelSystem::Type::XyTwoSpin;
  sys.n_sites = 2;
  model::CurveSpec curve;
  char buf[64];
  std::snprintf(buf, sizeof buf, "lambda*sin(%.17g)", theta);
  curve.delta_expr = expr::parse_expression(buf);
  std::snprintf(buf, sizeof buf, "lambda*cos(%.17g)", theta);
  curve.h_expr = expr::parse_expression(buf);
  curve.lambda_min = lo;
  curve.lambda_max = hi;
  return probe::CurveContext(std::move(sys), std::move(curve));
}

MeasureKind coherence_l1_kind(std::shared_ptr<const IncoherentBasis> basis) {
  MeasureKind kind;
  kind.tag = MeasureTag::CoherenceL1;
  kind.basis = std::move(basis);
  return kind;
}

DensityMatrix random_density(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix a(n, n);
  for (auto& e : a.entries()) e = Complex(g(rng), g(rng));
  ComplexMatrix rho = num::matmul(a, num::adjoint(a));
  const double tr = num::trace(rho).real();
  rho *= Complex{1.0 / tr, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
      rho(i, j) = avg;
      rho(j, i) = std::conj(avg);
    }
  for (std::size_t i = 0; i < n; ++i) rho(i, i) = rho(i, i).real();
  return DensityMatrix(std::move(rho));
}

CVector random_pure_vec(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(n);
  double nn = 0.0;
  for (auto& x : v) {
    x = Complex(g(rng), g(rng));
    nn += std::norm(x);
  }
  const double s = std::sqrt(nn);
  for (auto& x : v) x /= s;
  return v;
}

IncoherentBasis random_basis(std::size_t n, std::mt19937& rng) {
  std::vector<CVector> cols;
  while (cols.size() < n) {
    CVector v = random_pure_vec(n, rng);
    for (const auto& c : cols) {
      const Complex ov = num::inner(c, v);
      for (std::size_t r = 0; r < n; ++r) v[r] -= ov * c[r];
    }
    const double s = num::norm2(v);
    if (s < 1e-6) continue;
    for (auto& x : v) x /= s;
    cols.push_back(std::move(v));
  }
  return IncoherentBasis::from_vectors(cols);
}

// Independent discord oracle: explicit measured state chi and Frobenius
// distance on a Bloch-angle grid with local zooming.
double discord_grid_oracle(const DensityMatrix& rho) {
  const ComplexMatrix& m = rho.matrix();
  auto objective = [&](double theta, double phi) {
    const Complex m0[2] = {std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi)};
    const Complex m1[2] = {-std::polar(std::sin(theta / 2.0), -phi), std::cos(theta / 2.0)};
    ComplexMatrix chi(4, 4);
    for (const Complex* mk : {m0, m1}) {
      ComplexMatrix p(4, 4);
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
          for (std::size_t i = 0; i < 2; ++i) p(a * 2 + i, b * 2 + i) = mk[a] * std::conj(mk[b]);
      chi += num::matmul(p, num::matmul(m, p));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < 16; ++i) acc += std::norm(m.entries()[i] - chi.entries()[i]);
    return acc;
  };
  double best = 1e18, bt = 0.0, bp = 0.0;
  for (int it = 0; it <= 120; ++it)
    for (int ip = 0; ip < 240; ++ip) {
      const double th = kPi * it / 120.0, ph = 2.0 * kPi * ip / 240.0;
      const double v = objective(th, ph);
      if (v < best) {
        best = v;
        bt = th;
        bp = ph;
      }
    }
  double half = kPi / 120.0;
  for (int round = 0; round < 5; ++round) {
    for (int i = -8; i <= 8; ++i)
      for (int j = -8; j <= 8; ++j) {
        const double v = objective(bt + half * i / 8.0, bp + half * j / 8.0);
        if (v < best) {
          best = v;
          bt = bt + half * i / 8.0;
          bp = bp + half * j / 8.0;
        }
      }
    half *= 0.12;
  }
  return best;
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

Check criterion_two_spin_spectrum() {
  Check c;
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100 && c.ok; ++trial) {
    const double delta = u(rng), h = u(rng);
    const double r = std::hypot(delta, h);
    std::vector<double> want = {-1.0, -r, r, 1.0};
    std::sort(want.begin(), want.end());
    const auto got = num::hermitian_eig(model::build_xy_two_spin(delta, h)).eigenvalues;
    for (int i = 0; i < 4; ++i) {
      c.expect_close(got[static_cast<std::size_t>(i)], want[static_cast<std::size_t>(i)], 1e-10,
                     "two-spin eigenvalue");
    }
  }
  return c;
}

Check criterion_ground_state_selection() {
  Check c;
  std::mt19937 rng(202);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int tested = 0;
  while (tested < 100 && c.ok) {
    const double delta = u(rng), h = u(rng);
    const double r = std::hypot(delta, h);
    if (std::abs(r - 1.0) < 0.02) continue;
    ++tested;
    const PureState psi = two_spin_ground(delta, h);
    if (r < 1.0) {
      const double a = 1.0 / std::sqrt(2.0);
      c.expect_le(std::abs(psi.amplitude(0)), 1e-10, "g-: |00> amplitude");
      c.expect_close(psi.amplitude(1).real(), a, 1e-10, "g-: |01> amplitude");
      c.expect_close(psi.amplitude(2).real(), a, 1e-10, "g-: |10> amplitude");
      c.expect_le(std::abs(psi.amplitude(3)), 1e-10, "g-: |11> amplitude");
    } else {
      const double theta = std::atan2(delta, h);
      c.expect_le(std::abs(psi.amplitude(0) - Complex{std::cos(theta / 2.0), 0.0}), 1e-10,
                  "g+: |00> amplitude");
      c.expect_le(std::abs(psi.amplitude(3) - Complex{std::sin(theta / 2.0), 0.0}), 1e-10,
                  "g+: |11> amplitude");
      c.expect_le(std::abs(psi.amplitude(1)), 1e-10, "g+: |01> amplitude");
      c.expect_le(std::abs(psi.amplitude(2)), 1e-10, "g+: |10> amplitude");
    }
  }
  return c;
}

Check criterion_coherence_values() {
  Check c;
  const IncoherentBasis comp = IncoherentBasis::computational(4);
  const IncoherentBasis bell = IncoherentBasis::bell_type_2q();

  for (double scale : {0.3, 0.6, 0.9}) {
    const auto gm = DensityMatrix::from_pure(two_spin_ground(scale * 0.6, scale * 0.8));
    c.expect_close(measures::coherence_l1(gm, comp), 1.0, 1e-10, "C_l1(g-) computational");
  }
  for (double theta : {kPi / 6.0, kPi / 4.0, kPi / 3.0, 1.1}) {
    const auto gp =
        DensityMatrix::from_pure(two_spin_ground(1.5 * std::sin(theta), 1.5 * std::cos(theta)));
    c.expect_close(measures::coherence_l1(gp, comp), std::abs(std::sin(theta)), 1e-10,
                   "C_l1(g+) computational");
  }
  const auto gm0 = DensityMatrix::from_pure(two_spin_ground(0.5, 0.0));
  const auto gp0 = DensityMatrix::from_pure(two_spin_ground(1.5, 0.0));
  c.expect_le(measures::coherence_l1(gm0, bell), 1e-10, "C_l1(g-) bell basis");
  c.expect_close(measures::coherence_l1(gp0, bell), 1.0, 1e-10, "C_l1(g+) bell basis");
  return c;
}

Check criterion_gcs_divergence() {
  Check c;
  const probe::CurveContext ctx = radial_two_spin(kPi / 3.0, 0.4, 1.6);
  const auto comp = std::make_shared<IncoherentBasis>(IncoherentBasis::computational(4));
  const MeasureKind kind = coherence_l1_kind(comp);

  std::vector<probe::SusceptibilityEstimate> first, second;
  for (double dl : {1e-2, 5e-3, 2.5e-3}) {
    first.push_back(probe::measure_susceptibility(ctx, kind, 1.0, dl));
    second.push_back(probe::second_susceptibility(ctx, kind, 1.0, dl));
  }
  for (std::size_t i = 0; i + 1 < first.size(); ++i) {
    const double ratio = std::abs(first[i + 1].value) / std::abs(first[i].value);
    c.expect(ratio >= 1.8 && ratio <= 2.2, "susceptibility ratio outside [1.8, 2.2]");
  }
  const auto rep = probe::classify_divergence(first, second);
  c.expect(rep.classification == probe::Classification::Divergent,
           "GCS at r=1 not classified divergent");
  return c;
}

Check criterion_entanglement_blindness() {
  Check c;
  // h = 0 line: delta = lambda crossing 1
  probe::ModelSystem sys;
  sys.type = probe::ModelSystem::Type::XyTwoSpin;
  model::CurveSpec curve;
  curve.delta_expr = expr::parse_expression("lambda");
  curve.h_expr = expr::parse_expression("0");
  curve.lambda_min = 0.4;
  curve.lambda_max = 1.6;
  const probe::CurveContext ctx(std::move(sys), std::move(curve));

  MeasureKind ent;
  ent.tag = MeasureTag::GeometricEntanglement;
  ent.split = Bipartition{2, {1}};

  for (double lam : {0.9, 1.0 - 2.5e-3, 1.0 + 2.5e-3, 1.1}) {
    const auto st = ctx.state_at(lam);
    c.expect_close(measures::evaluate_measure(ent, st->rho, st->pure()), 0.5, 1e-10,
                   "geometric entanglement off the crossing");
  }
  for (double dl : {1e-2, 5e-3, 2.5e-3}) {
    const auto est = probe::measure_susceptibility(ctx, ent, 1.0, dl);
    c.expect_le(std::abs(est.value), 1.0, "entanglement susceptibility stays bounded");
  }

  // theorem3_auto basis from states straddling the crossing
  const auto before = ctx.state_at(1.0 - 2.5e-3);
  const auto after = ctx.state_at(1.0 + 2.5e-3);
  const IncoherentBasis t3 = probe::theorem3_basis(*before->psi, *after->psi);
  const MeasureKind kind = coherence_l1_kind(std::make_shared<IncoherentBasis>(t3));
  std::vector<probe::SusceptibilityEstimate> first, second;
  for (double dl : {1e-2, 5e-3, 2.5e-3}) {
    first.push_back(probe::measure_susceptibility(ctx, kind, 1.0, dl));
    second.push_back(probe::second_susceptibility(ctx, kind, 1.0, dl));
  }
  const auto rep = probe::classify_divergence(first, second);
  c.expect(rep.classification == probe::Classification::Divergent,
           "coherence in the theorem-3 basis not divergent at delta = 1");
  return c;
}

Check criterion_berry_phase() {
  Check c;
  const ComplexMatrix half_mag = model::magnetization_z(2, 0.5);

  auto jump_at = [&](double theta) {
    const PureState lo = two_spin_ground(0.995 * std::sin(theta), 0.995 * std::cos(theta));
    const PureState hi = two_spin_ground(1.005 * std::sin(theta), 1.005 * std::cos(theta));
    const auto phi_lo = probe::berry_phase(lo, half_mag);
    const auto phi_hi = probe::berry_phase(hi, half_mag);
    c.expect_le(std::abs(phi_lo.analytic - phi_lo.integrated), 1e-8,
                "analytic vs Simpson (below)");
    c.expect_le(std::abs(phi_hi.analytic - phi_hi.integrated), 1e-8,
                "analytic vs Simpson (above)");
    return std::abs(phi_hi.analytic - phi_lo.analytic);
  };

  c.expect_close(jump_at(kPi / 4.0), 2.0 * kPi * std::cos(kPi / 4.0), 1e-6,
                 "berry jump at theta = pi/4");
  c.expect_le(jump_at(kPi / 2.0), 1e-10, "berry jump vanishes at theta = pi/2");
  return c;
}

Check criterion_order_parameter() {
  Check c;
  const ComplexMatrix mag = model::magnetization_z(2, 1.0);
  c.expect_le(std::abs(probe::order_parameter_expectation(two_spin_ground(0.5, 0.5), mag)),
              1e-12, "<g-|O|g-> = 0");

  const std::vector<double> thetas = {kPi / 6.0, kPi / 4.0, kPi / 3.0};
  std::vector<double> jumps;
  for (double theta : thetas) {
    const PureState lo = two_spin_ground(0.995 * std::sin(theta), 0.995 * std::cos(theta));
    const PureState hi = two_spin_ground(1.005 * std::sin(theta), 1.005 * std::cos(theta));
    const double jump = std::abs(probe::order_parameter_expectation(hi, mag) -
                                 probe::order_parameter_expectation(lo, mag));
    c.expect(jump > 1e-6, "order-parameter jump must be nonzero");
    jumps.push_back(jump);
  }
  for (std::size_t i = 0; i + 1 < thetas.size(); ++i) {
    const double got = jumps[i] / jumps[i + 1];
    const double want = std::cos(thetas[i]) / std::cos(thetas[i + 1]);
    c.expect_close(got, want, 1e-6, "order-parameter jump ratio vs cos(theta) ratio");
  }
  return c;
}

Check criterion_parity_flip() {
  Check c;
  for (int n : {4, 6, 8}) {
    probe::ModelSystem sys;
    sys.type = probe::ModelSystem::Type::XyChain;
    sys.n_sites = n;
    sys.boundary = model::Boundary::Periodic;
    model::CurveSpec curve;
    curve.delta_expr = expr::parse_expression("0.6");
    curve.h_expr = expr::parse_expression("lambda");
    curve.lambda_min = 0.4;
    curve.lambda_max = 1.2;
    const probe::CurveContext ctx(std::move(sys), std::move(curve));
    const ComplexMatrix parity = model::parity_operator(n);

    auto parity_at = [&](double h) {
      const auto st = ctx.state_at(h);
      return num::inner(st->psi->amplitudes(),
                        num::mat_vec(parity, st->psi->amplitudes()))
          .real();
    };

    // The finite ring's parity oscillates through a ladder of level crossings
    // below the factorizing field and settles above it, so the transition at
    // r = 1 is the first flip met when walking the grid downward from the
    // polarized side.
    double lo = 0.5, hi = 1.1;
    double prev = parity_at(hi);
    double bracket_lo = 0.0, bracket_hi = 0.0;
    bool found = false;
    for (int i = 11; i >= 0; --i) {
      const double h = lo + (hi - lo) * i / 12.0;
      const double p = parity_at(h);
      if (prev * p < 0.0) {
        bracket_lo = h;
        bracket_hi = lo + (hi - lo) * (i + 1) / 12.0;
        found = true;
        break;
      }
      prev = p;
    }
    c.expect(found, "no parity flip found on the coarse grid (N=" + std::to_string(n) + ")");
    if (!found) return c;

    const double p_lo = parity_at(bracket_lo);
    while (bracket_hi - bracket_lo > 1e-3) {
      const double mid = 0.5 * (bracket_lo + bracket_hi);
      if (p_lo * parity_at(mid) < 0.0) {
        bracket_hi = mid;
      } else {
        bracket_lo = mid;
      }
    }
    const double h_star = 0.5 * (bracket_lo + bracket_hi);
    c.expect_le(std::abs(h_star - 0.8), 1e-3,
                "parity flip location (N=" + std::to_string(n) + ")");

    // parity-Fourier incoherent basis across the flip
    const auto before = ctx.state_at(0.79);
    const auto after = ctx.state_at(0.81);
    const IncoherentBasis basis = probe::parity_fourier_basis(n, *before->psi, *after->psi);
    const double coh_before =
        measures::coherence_l1(DensityMatrix::from_pure(*before->psi), basis);
    const double coh_after = measures::coherence_l1(DensityMatrix::from_pure(*after->psi), basis);
    c.expect_le(coh_before, 1e-8, "coherence before the flip (N=" + std::to_string(n) + ")");
    c.expect(coh_after > 0.1, "coherence after the flip (N=" + std::to_string(n) + ")");

    const MeasureKind kind = coherence_l1_kind(std::make_shared<IncoherentBasis>(basis));
    std::vector<probe::SusceptibilityEstimate> first, second;
    for (double dl : {1e-2, 5e-3, 2.5e-3}) {
      first.push_back(probe::measure_susceptibility(ctx, kind, h_star, dl));
      second.push_back(probe::second_susceptibility(ctx, kind, h_star, dl));
    }
    const auto rep = probe::classify_divergence(first, second);
    c.expect(rep.classification == probe::Classification::Divergent,
             "GCS not divergent at the parity flip (N=" + std::to_string(n) + ")");
  }
  return c;
}

Check criterion_theorem1_bound() {
  Check c;
  std::mt19937 rng(707);

  // 500 random (state pair, measure, distance) triples
  for (int trial = 0; trial < 500 && c.ok; ++trial) {
    const int mode = trial % 5;
    if (mode == 4) {
      // geometric entanglement in metric form on pure two-qubit pairs
      const PureState a{random_pure_vec(4, rng)}, b{random_pure_vec(4, rng)};
      MeasureKind ent;
      ent.tag = MeasureTag::GeometricEntanglement;
      ent.split = Bipartition{2, {1}};
      const auto ra = DensityMatrix::from_pure(a), rb = DensityMatrix::from_pure(b);
      const auto na = measures::nonclassicality_distance_form(ent, ra, &a);
      const auto nb = measures::nonclassicality_distance_form(ent, rb, &b);
      const double d = measures::distance(ra, rb, na.dist);
      c.expect_le(std::abs(na.value - nb.value), d + 1e-10, "bound (entanglement form)");
      continue;
    }
    const std::size_t dim = mode == 3 ? 4 : static_cast<std::size_t>(2 + mode);
    const DensityMatrix r1 = random_density(dim, rng);
    const DensityMatrix r2 = random_density(dim, rng);
    MeasureKind kind;
    if (mode == 3) {
      kind.tag = MeasureTag::GeometricDiscord2q;  // sqrt form, Hilbert-Schmidt metric
    } else {
      kind.tag = MeasureTag::GeometricCoherence;
      kind.dist = mode == 0 ? DistanceKind::L1Entrywise
                            : (mode == 1 ? DistanceKind::Trace : DistanceKind::HilbertSchmidt);
      kind.basis = std::make_shared<IncoherentBasis>(
          trial % 2 == 0 ? IncoherentBasis::computational(dim) : random_basis(dim, rng));
    }
    const auto n1 = measures::nonclassicality_distance_form(kind, r1, nullptr);
    const auto n2 = measures::nonclassicality_distance_form(kind, r2, nullptr);
    const double d = measures::distance(r1, r2, n1.dist);
    c.expect_le(std::abs(n1.value - n2.value), d + 1e-10, "bound (random triple)");
  }

  // plus every adjacent pair of a radial sweep
  const probe::CurveContext ctx = radial_two_spin(kPi / 3.0, 0.4, 1.6);
  const auto comp = std::make_shared<IncoherentBasis>(IncoherentBasis::computational(4));
  for (auto dist : {DistanceKind::L1Entrywise, DistanceKind::Trace, DistanceKind::HilbertSchmidt}) {
    MeasureKind kind;
    kind.tag = MeasureTag::GeometricCoherence;
    kind.dist = dist;
    kind.basis = comp;
    for (int i = 0; i < 100 && c.ok; ++i) {
      const double lam = 0.5 + i * 0.01;
      const auto chk = probe::verify_theorem1_bound(ctx, kind, lam, 0.01, dist);
      c.expect_le(chk.lhs, chk.rhs + 1e-10, "bound (sweep evaluation)");
    }
  }
  return c;
}

Check criterion_optimizer_oracles() {
  Check c;
  std::mt19937 rng(808);
  const IncoherentBasis comp3 = IncoherentBasis::computational(3);
  for (int trial = 0; trial < 20 && c.ok; ++trial) {
    const DensityMatrix rho = random_density(3, rng);
    const double closed = measures::geometric_coherence(rho, comp3, DistanceKind::HilbertSchmidt);
    const double minimized =
        measures::geometric_coherence_minimized(rho, comp3, DistanceKind::HilbertSchmidt);
    c.expect_close(minimized, closed, 1e-6, "HS geometric coherence: minimizer vs closed form");
  }
  for (int trial = 0; trial < 20 && c.ok; ++trial) {
    const DensityMatrix rho = random_density(4, rng);
    const double fast = measures::geometric_discord_2q(rho);
    const double oracle = discord_grid_oracle(rho);
    c.expect_close(fast, oracle, 1e-4, "discord vs brute-force measurement grid");
  }
  return c;
}

Check criterion_finite_temperature() {
  Check c;
  const auto comp = std::make_shared<IncoherentBasis>(IncoherentBasis::computational(4));

  std::vector<MeasureKind> kinds;
  kinds.push_back(coherence_l1_kind(comp));
  {
    MeasureKind k;
    k.tag = MeasureTag::CoherenceRelativeEntropy;
    k.basis = comp;
    kinds.push_back(k);
  }
  for (auto dist : {DistanceKind::L1Entrywise, DistanceKind::Trace, DistanceKind::HilbertSchmidt}) {
    MeasureKind k;
    k.tag = MeasureTag::GeometricCoherence;
    k.dist = dist;
    k.basis = comp;
    kinds.push_back(k);
  }
  {
    MeasureKind k;
    k.tag = MeasureTag::GeometricDiscord2q;
    kinds.push_back(k);
  }

  for (double r : {0.5, 1.5}) {
    const double delta = r * std::sin(kPi / 4.0), h = r * std::cos(kPi / 4.0);
    const ComplexMatrix ham = model::build_xy_two_spin(delta, h);
    const DensityMatrix hot = states::gibbs_state(ham, 50.0);
    const DensityMatrix cold = DensityMatrix::from_pure(states::ground_state(ham).state);
    for (const auto& kind : kinds) {
      const double a = measures::evaluate_measure(kind, hot, nullptr);
      const double b = measures::evaluate_measure(kind, cold, nullptr);
      c.expect_close(a, b, 1e-6, "beta = 50 vs zero temperature: " + kind.name());
    }
  }

  const DensityMatrix mixed = states::gibbs_state(model::build_xy_two_spin(0.9, 0.7), 0.0);
  c.expect_le(measures::coherence_l1(mixed, *comp), 1e-10, "beta = 0: C_l1 vanishes");
  c.expect_le(measures::coherence_relative_entropy(mixed, *comp), 1e-10,
              "beta = 0: relative-entropy coherence vanishes");
  for (auto dist : {DistanceKind::L1Entrywise, DistanceKind::Trace, DistanceKind::HilbertSchmidt}) {
    c.expect_le(measures::geometric_coherence(mixed, *comp, dist), 1e-10,
                "beta = 0: geometric coherence vanishes");
  }
  return c;
}

sweep::SweepConfig determinism_config() {
  sweep::SweepConfig cfg;
  cfg.system.type = probe::ModelSystem::Type::XyTwoSpin;
  cfg.system.n_sites = 2;
  cfg.curve.delta_expr = expr::parse_expression("lambda*sin(pi/4)");
  cfg.curve.h_expr = expr::parse_expression("lambda*cos(pi/4)");
  cfg.curve.lambda_min = 0.5;
  cfg.curve.lambda_max = 1.5;
  cfg.grid = {0.5, 1.5, 41};
  sweep::MeasureSpec m1;
  m1.tag = MeasureTag::CoherenceL1;
  sweep::MeasureSpec m2;
  m2.tag = MeasureTag::GeometricEntanglement;
  cfg.measures = {m1, m2};
  sweep::BasisSpec b1;  // computational
  sweep::BasisSpec b2;
  b2.kind = sweep::BasisSpecKind::Theorem3Auto;
  cfg.bases = {b1, b2};
  cfg.parallelism = 2;
  return cfg;
}

Check criterion_determinism() {
  Check c;
  const sweep::SweepConfig cfg = determinism_config();

  const auto res_a = sweep::run_sweep(cfg, nullptr);
  const std::string csv_a = sweep::emit_csv(res_a.rows);

  const auto cache_dir = std::filesystem::temp_directory_path() /
                         ("qpt-selftest-cache-" + std::to_string(::getpid()));
  std::filesystem::remove_all(cache_dir);
  {
    sweep::ResultCache cache(cache_dir);
    const auto res_b = sweep::run_sweep(cfg, &cache);
    const std::string csv_b = sweep::emit_csv(res_b.rows);
    c.expect(csv_a == csv_b, "CSV differs between cached and uncached runs");
    c.expect(res_b.cache_misses == res_b.rows.size() && res_b.cache_hits == 0,
             "cold cache should miss once per row");
  }
  {
    sweep::ResultCache cache(cache_dir);
    const auto res_c = sweep::run_sweep(cfg, &cache);
    const std::string csv_c = sweep::emit_csv(res_c.rows);
    c.expect(csv_a == csv_c, "CSV differs between runs");
    c.expect(res_c.cache_hits == res_c.rows.size() && res_c.cache_misses == 0,
             "warm cache should hit on every row");
  }
  std::filesystem::remove_all(cache_dir);

  // the sweep itself must find exactly the r = 1 point, divergent
  c.expect(res_a.criticals.size() == 1, "expected exactly one critical point");
  if (res_a.criticals.size() == 1) {
    c.expect_le(std::abs(res_a.criticals[0].lambda_c - 1.0), 0.01, "critical point location");
    c.expect(res_a.criticals[0].classification == probe::Classification::Divergent,
             "critical point classification");
  }
  return c;
}

}  // namespace

bool all_passed(const std::vector<ItemResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

std::vector<ItemResult> run_all(std::ostream& out) {
  struct Item {
    const char* name;
    std::function<Check()> fn;
  };
  const std::vector<Item> items = {
      {"01 two-spin spectrum {-1, -r, r, 1}", criterion_two_spin_spectrum},
      {"02 ground-state selection across r = 1", criterion_ground_state_selection},
      {"03 l1 coherence values (computational and bell bases)", criterion_coherence_values},
      {"04 GCS divergence at r = 1 (radial curve)", criterion_gcs_divergence},
      {"05 entanglement-blind crossing at h = 0", criterion_entanglement_blindness},
      {"06 berry phase: quadrature match and jump", criterion_berry_phase},
      {"07 order parameter: zero below, cos-theta jumps", criterion_order_parameter},
      {"08 N-spin parity flip at h = sqrt(1 - delta^2)", criterion_parity_flip},
      {"09 reverse-triangle bound suite", criterion_theorem1_bound},
      {"10 optimizer vs brute-force oracles", criterion_optimizer_oracles},
      {"11 finite-temperature limits", criterion_finite_temperature},
      {"12 deterministic scans and cache round trip", criterion_determinism},
  };

  std::vector<ItemResult> results;
  for (const auto& item : items) {
    ItemResult res;
    res.name = item.name;
    try {
      const Check c = item.fn();
      res.pass = c.ok;
      res.detail = c.detail;
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail = e.what();
    }
    out << (res.pass ? "PASS  " : "FAIL  ") << res.name;
    if (!res.pass && !res.detail.empty()) out << "  [" << res.detail << "]";
    out << "\n" << std::flush;
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace qpt::selftest
