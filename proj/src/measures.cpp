#include "qpt/measures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "qpt/eig.hpp"

namespace qpt::measures {

namespace {

ComplexMatrix rotate_to_basis(const DensityMatrix& rho, const IncoherentBasis& basis) {
  if (rho.dimension() != basis.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "state and basis dimensions differ");
  }
  return num::matmul(num::adjoint(basis.columns()),
                     num::matmul(rho.matrix(), basis.columns()));
}

double offdiag_abs_sum(const ComplexMatrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j) acc += std::abs(m(i, j));
  return acc;
}

double offdiag_sq_sum(const ComplexMatrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j) acc += std::norm(m(i, j));
  return acc;
}

// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  int rho_idx = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho_idx = static_cast<int>(i);
      theta = t;
    }
  }
  (void)rho_idx;
  for (auto& x : v) x = std::max(0.0, x - theta);
  // Kill the last-ulp drift so downstream trace checks stay exact.
  double s = 0.0;
  for (double x : v) s += x;
  if (s > 0.0)
    for (auto& x : v) x /= s;
  return v;
}

// Objective and subgradient for min over diagonal sigma of D(rho, diag(d)).
// Everything happens in the rotated frame where the incoherent states are
// literally diagonal.
struct DiagonalObjective {
  const ComplexMatrix& rho_rot;
  DistanceKind kind;

  double operator()(const std::vector<double>& d) const {
    const std::size_t n = rho_rot.rows();
    switch (kind) {
      case DistanceKind::L1Entrywise: {
        double acc = offdiag_abs_sum(rho_rot);
        for (std::size_t i = 0; i < n; ++i) acc += std::abs(rho_rot(i, i).real() - d[i]);
        return acc;
      }
      case DistanceKind::HilbertSchmidt: {
        double acc = offdiag_sq_sum(rho_rot);
        for (std::size_t i = 0; i < n; ++i) {
          const double t = rho_rot(i, i).real() - d[i];
          acc += t * t;
        }
        return std::sqrt(acc);
      }
      case DistanceKind::Trace: {
        ComplexMatrix diff = rho_rot;
        for (std::size_t i = 0; i < n; ++i) diff(i, i) -= d[i];
        for (std::size_t i = 0; i < n; ++i) diff(i, i) = diff(i, i).real();
        const auto ed = num::hermitian_eig(diff);
        double acc = 0.0;
        for (double lam : ed.eigenvalues) acc += std::abs(lam);
        return 0.5 * acc;
      }
    }
    return 0.0;
  }

  std::vector<double> subgradient(const std::vector<double>& d) const {
    const std::size_t n = rho_rot.rows();
    std::vector<double> g(n, 0.0);
    switch (kind) {
      case DistanceKind::L1Entrywise:
        for (std::size_t i = 0; i < n; ++i) {
          const double t = rho_rot(i, i).real() - d[i];
          g[i] = t > 0.0 ? -1.0 : (t < 0.0 ? 1.0 : 0.0);
        }
        break;
      case DistanceKind::HilbertSchmidt: {
        const double f = (*this)(d);
        if (f > 1e-15) {
          for (std::size_t i = 0; i < n; ++i) g[i] = -(rho_rot(i, i).real() - d[i]) / f;
        }
        break;
      }
      case DistanceKind::Trace: {
        ComplexMatrix diff = rho_rot;
        for (std::size_t i = 0; i < n; ++i) diff(i, i) -= d[i];
        for (std::size_t i = 0; i < n; ++i) diff(i, i) = diff(i, i).real();
        const auto ed = num::hermitian_eig(diff);
        for (std::size_t k = 0; k < n; ++k) {
          const double s = ed.eigenvalues[k] > 0.0 ? 1.0 : (ed.eigenvalues[k] < 0.0 ? -1.0 : 0.0);
          if (s == 0.0) continue;
          for (std::size_t i = 0; i < n; ++i)
            g[i] += -0.5 * s * std::norm(ed.eigenvectors(i, k));
        }
        break;
      }
    }
    return g;
  }
};

// Golden-section line search for the convex transfer f(d with t moved from
// coordinate i to j), t in [lo, hi].
double golden_search(const std::function<double(double)>& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 70 && (b - a) > 1e-13; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

struct SimplexMinResult {
  std::vector<double> d;
  double value = 0.0;
};

void subgradient_stage(const DiagonalObjective& obj, std::vector<double>& best_d,
                       double& best_f, double c0, int cap) {
  const std::size_t n = best_d.size();
  std::vector<double> d = best_d;
  int stale = 0;
  for (int t = 1; t <= cap && stale < 300; ++t) {
    const std::vector<double> g = obj.subgradient(d);
    double gn = 0.0;
    for (double x : g) gn += x * x;
    if (gn <= 1e-24) break;  // interior flat point: already optimal
    const double step = c0 / std::sqrt(static_cast<double>(t));
    for (std::size_t i = 0; i < n; ++i) d[i] -= step * g[i];
    d = project_simplex(std::move(d));
    const double f = obj(d);
    if (f < best_f - 1e-14) {
      best_f = f;
      best_d = d;
      stale = 0;
    } else {
      ++stale;
    }
  }
}

void polish_stage(const DiagonalObjective& obj, std::vector<double>& d, double& f_cur) {
  const std::size_t n = d.size();
  for (int pass = 0; pass < 80; ++pass) {
    const double f_before = f_cur;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double lo = -d[j], hi = d[i];
        if (hi - lo < 1e-15) continue;
        auto line = [&](double t) {
          std::vector<double> trial = d;
          trial[i] -= t;
          trial[j] += t;
          return obj(trial);
        };
        const double t_star = golden_search(line, lo, hi);
        const double f_star = line(t_star);
        if (f_star < f_cur) {
          d[i] -= t_star;
          d[j] += t_star;
          f_cur = f_star;
        }
      }
    }
    if (f_before - f_cur < 1e-13 * std::max(1.0, f_before)) break;
  }
}

SimplexMinResult minimize_over_simplex(const DiagonalObjective& obj, std::vector<double> d0) {
  constexpr int kIterationCap = 100000;

  std::vector<double> best_d = project_simplex(std::move(d0));
  double best_f = obj(best_d);

  // Alternate a global-but-slow subgradient stage with pairwise line-search
  // polish. Polish alone can stall on a kink of the trace objective; the
  // subgradient bursts walk out of such corners.
  subgradient_stage(obj, best_d, best_f, 0.25 * std::max(best_f, 1e-3), kIterationCap);
  polish_stage(obj, best_d, best_f);
  for (double c0 : {1e-3, 1e-5}) {
    subgradient_stage(obj, best_d, best_f, c0, 2000);
    polish_stage(obj, best_d, best_f);
  }
  return {best_d, best_f};
}

// First-order optimality check on the simplex. The analytic KKT gap can
// overestimate at kinks of the trace objective, so pairs that look active are
// re-probed with a tiny actual transfer; convexity makes the probe a safe
// underestimate of the true descent rate.
void require_converged(const DiagonalObjective& obj, const std::vector<double>& d, double f0) {
  const std::size_t n = d.size();
  const std::vector<double> g = obj.subgradient(d);
  double gmin = g[0];
  for (double x : g) gmin = std::min(gmin, x);
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 1e-10) gap = std::max(gap, g[i] - gmin);
  if (gap <= 1e-8) return;

  // Probe step large enough that objective roundoff (~1e-15) cannot fake a
  // descent rate above the 1e-8 threshold; convexity keeps the probe an
  // underestimate of the true rate, so real stalls still trip it.
  const double t = 1e-5;
  std::vector<std::size_t> donors, takers;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > t) donors.push_back(i);
    takers.push_back(i);
  }
  auto by_g_desc = [&](std::size_t x, std::size_t y) { return g[x] > g[y]; };
  auto by_g_asc = [&](std::size_t x, std::size_t y) { return g[x] < g[y]; };
  std::sort(donors.begin(), donors.end(), by_g_desc);
  std::sort(takers.begin(), takers.end(), by_g_asc);
  if (donors.size() > 8) donors.resize(8);
  if (takers.size() > 8) takers.resize(8);

  double worst_rate = 0.0;
  for (std::size_t i : donors) {
    for (std::size_t j : takers) {
      if (j == i) continue;
      std::vector<double> trial = d;
      trial[i] -= t;
      trial[j] += t;
      worst_rate = std::max(worst_rate, (f0 - obj(trial)) / t);
    }
  }
  if (worst_rate > 1e-8) {
    throw Error(ErrorKind::OptimizerDidNotConverge,
                "simplex minimizer residual above 1e-8");
  }
}

}  // namespace

const char* distance_name(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::L1Entrywise: return "l1_entrywise";
    case DistanceKind::Trace: return "trace";
    case DistanceKind::HilbertSchmidt: return "hilbert_schmidt";
  }
  return "?";
}

double distance(const DensityMatrix& rho, const DensityMatrix& sigma, DistanceKind kind) {
  if (rho.dimension() != sigma.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "distance between unequal dimensions");
  }
  const ComplexMatrix diff = rho.matrix() - sigma.matrix();
  switch (kind) {
    case DistanceKind::L1Entrywise: {
      double acc = 0.0;
      for (const auto& e : diff.entries()) acc += std::abs(e);
      return acc;
    }
    case DistanceKind::HilbertSchmidt:
      return num::frobenius(diff);
    case DistanceKind::Trace: {
      const auto ed = num::hermitian_eig(diff);
      double acc = 0.0;
      for (double lam : ed.eigenvalues) acc += std::abs(lam);
      return 0.5 * acc;
    }
  }
  return 0.0;
}

double coherence_l1(const DensityMatrix& rho, const IncoherentBasis& basis) {
  return offdiag_abs_sum(rotate_to_basis(rho, basis));
}

double coherence_relative_entropy(const DensityMatrix& rho, const IncoherentBasis& basis) {
  const DensityMatrix deph = states::dephase(rho, basis);
  const double s = states::von_neumann_entropy(deph) - states::von_neumann_entropy(rho);
  return std::max(0.0, s);
}

double geometric_coherence(const DensityMatrix& rho, const IncoherentBasis& basis,
                           DistanceKind kind) {
  if (kind == DistanceKind::HilbertSchmidt) {
    // Nearest incoherent state under Hilbert-Schmidt is the dephased state.
    return std::sqrt(offdiag_sq_sum(rotate_to_basis(rho, basis)));
  }
  return geometric_coherence_minimized(rho, basis, kind);
}

double geometric_coherence_minimized(const DensityMatrix& rho, const IncoherentBasis& basis,
                                     DistanceKind kind) {
  const ComplexMatrix rho_rot = rotate_to_basis(rho, basis);
  const std::size_t n = rho_rot.rows();
  const DiagonalObjective obj{rho_rot, kind};

  // Warm start: the dephased diagonal. Second start from the flat interior
  // point forces the optimizer to actually travel, which keeps the
  // closed-form cross-checks meaningful.
  std::vector<double> dephased(n), uniform(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) dephased[i] = std::max(0.0, rho_rot(i, i).real());

  SimplexMinResult a = minimize_over_simplex(obj, dephased);
  SimplexMinResult b = minimize_over_simplex(obj, uniform);
  const SimplexMinResult& best = a.value <= b.value ? a : b;
  require_converged(obj, best.d, best.value);
  return best.value;
}

double geometric_entanglement(const PureState& psi, const Bipartition& split) {
  const num::SchmidtDecomposition sd = num::schmidt(psi.amplitudes(), split);
  const double cmax = sd.max_coefficient();
  return std::max(0.0, 1.0 - cmax * cmax);
}

namespace {

// ||off-diagonal A-block||^2 doubled: the squared HS distance between rho and
// its A-dephasing in the measurement basis (m0, m1).
double discord_objective(const ComplexMatrix& rho, double theta, double phi) {
  const Complex m0[2] = {std::cos(theta / 2.0),
                         std::polar(std::sin(theta / 2.0), phi)};
  const Complex m1[2] = {-std::polar(std::sin(theta / 2.0), -phi),
                         std::cos(theta / 2.0)};
  double acc = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      Complex block{0.0, 0.0};
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
          block += std::conj(m0[a]) * rho(a * 2 + i, b * 2 + j) * m1[b];
      acc += std::norm(block);
    }
  return 2.0 * acc;
}

}  // namespace

double geometric_discord_2q(const DensityMatrix& rho) {
  if (rho.dimension() != 4) {
    throw Error(ErrorKind::DimensionMismatch, "two-qubit discord needs dimension 4");
  }
  const ComplexMatrix& m = rho.matrix();

  // Coarse Bloch-angle grid.
  constexpr int kGrid = 64;
  double best = std::numeric_limits<double>::infinity();
  double bt = 0.0, bp = 0.0;
  for (int it = 0; it <= kGrid; ++it) {
    const double theta = std::numbers::pi * it / kGrid;
    for (int ip = 0; ip < kGrid; ++ip) {
      const double phi = 2.0 * std::numbers::pi * ip / kGrid;
      const double v = discord_objective(m, theta, phi);
      if (v < best) {
        best = v;
        bt = theta;
        bp = phi;
      }
    }
  }

  // Nelder-Mead refinement around the grid winner.
  struct Vertex {
    double t, p, f;
  };
  auto eval = [&](double t, double p) { return discord_objective(m, t, p); };
  const double h0 = std::numbers::pi / kGrid;
  Vertex s[3] = {{bt, bp, best},
                 {bt + h0, bp, eval(bt + h0, bp)},
                 {bt, bp + h0, eval(bt, bp + h0)}};
  for (int it = 0; it < 400; ++it) {
    std::sort(s, s + 3, [](const Vertex& x, const Vertex& y) { return x.f < y.f; });
    const double spread = std::max(std::abs(s[2].t - s[0].t), std::abs(s[2].p - s[0].p));
    if (spread < 1e-10 && s[2].f - s[0].f < 1e-15) break;
    const double ct = 0.5 * (s[0].t + s[1].t), cp = 0.5 * (s[0].p + s[1].p);
    const double rt = ct + (ct - s[2].t), rp = cp + (cp - s[2].p);
    const double fr = eval(rt, rp);
    if (fr < s[0].f) {
      const double et = ct + 2.0 * (ct - s[2].t), ep = cp + 2.0 * (cp - s[2].p);
      const double fe = eval(et, ep);
      s[2] = fe < fr ? Vertex{et, ep, fe} : Vertex{rt, rp, fr};
    } else if (fr < s[1].f) {
      s[2] = {rt, rp, fr};
    } else {
      const double kt = ct + 0.5 * (s[2].t - ct), kp = cp + 0.5 * (s[2].p - cp);
      const double fk = eval(kt, kp);
      if (fk < s[2].f) {
        s[2] = {kt, kp, fk};
      } else {
        for (int i = 1; i < 3; ++i) {
          s[i].t = s[0].t + 0.5 * (s[i].t - s[0].t);
          s[i].p = s[0].p + 0.5 * (s[i].p - s[0].p);
          s[i].f = eval(s[i].t, s[i].p);
        }
      }
    }
  }
  std::sort(s, s + 3, [](const Vertex& x, const Vertex& y) { return x.f < y.f; });
  return std::max(0.0, std::min(best, s[0].f));
}

bool MeasureKind::coherence_type() const {
  return tag == MeasureTag::CoherenceL1 || tag == MeasureTag::CoherenceRelativeEntropy ||
         tag == MeasureTag::GeometricCoherence;
}

std::string MeasureKind::name() const {
  switch (tag) {
    case MeasureTag::CoherenceL1: return "coherence_l1";
    case MeasureTag::CoherenceRelativeEntropy: return "coherence_relative_entropy";
    case MeasureTag::GeometricCoherence:
      return std::string("geometric_coherence_") + distance_name(dist);
    case MeasureTag::GeometricEntanglement: return "geometric_entanglement";
    case MeasureTag::GeometricDiscord2q: return "geometric_discord_2q";
  }
  return "?";
}

double evaluate_measure(const MeasureKind& kind, const DensityMatrix& rho,
                        const PureState* psi) {
  if (kind.coherence_type()) {
    if (!kind.basis) {
      throw Error(ErrorKind::IncompatibleMeasure, "coherence measure needs a basis");
    }
    switch (kind.tag) {
      case MeasureTag::CoherenceL1: return coherence_l1(rho, *kind.basis);
      case MeasureTag::CoherenceRelativeEntropy:
        return coherence_relative_entropy(rho, *kind.basis);
      case MeasureTag::GeometricCoherence:
        return geometric_coherence(rho, *kind.basis, kind.dist);
      default: break;
    }
  }
  if (kind.tag == MeasureTag::GeometricEntanglement) {
    if (!psi) {
      throw Error(ErrorKind::MixedStateUnsupported,
                  "geometric entanglement is defined on pure states");
    }
    if (!kind.split) {
      throw Error(ErrorKind::InvalidSplit, "entanglement measure needs a bipartition");
    }
    return geometric_entanglement(*psi, *kind.split);
  }
  if (kind.tag == MeasureTag::GeometricDiscord2q) return geometric_discord_2q(rho);
  throw Error(ErrorKind::IncompatibleMeasure, "unhandled measure kind");
}

DistanceFormValue nonclassicality_distance_form(const MeasureKind& kind,
                                                const DensityMatrix& rho,
                                                const PureState* psi) {
  switch (kind.tag) {
    case MeasureTag::CoherenceL1:
      if (!kind.basis) throw Error(ErrorKind::IncompatibleMeasure, "needs a basis");
      return {coherence_l1(rho, *kind.basis), DistanceKind::L1Entrywise};
    case MeasureTag::GeometricCoherence:
      if (!kind.basis) throw Error(ErrorKind::IncompatibleMeasure, "needs a basis");
      return {geometric_coherence(rho, *kind.basis, kind.dist), kind.dist};
    case MeasureTag::GeometricEntanglement: {
      const double e = evaluate_measure(kind, rho, psi);
      // min HS distance from a pure state to the pure product set.
      return {std::sqrt(2.0 * e), DistanceKind::HilbertSchmidt};
    }
    case MeasureTag::GeometricDiscord2q:
      return {std::sqrt(geometric_discord_2q(rho)), DistanceKind::HilbertSchmidt};
    case MeasureTag::CoherenceRelativeEntropy:
      throw Error(ErrorKind::IncompatibleMeasure,
                  "relative entropy is not induced by a metric");
  }
  throw Error(ErrorKind::IncompatibleMeasure, "unhandled measure kind");
}

}  // namespace qpt::measures
