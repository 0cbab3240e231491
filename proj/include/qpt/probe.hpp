#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "qpt/measures.hpp"
#include "qpt/model.hpp"

namespace qpt::probe {

using measures::DistanceKind;
using measures::MeasureKind;
using model::ComplexMatrix;
using num::Complex;
using num::CVector;
using states::DensityMatrix;
using states::IncoherentBasis;
using states::PureState;

// The Hamiltonian family a curve sweeps through.
struct ModelSystem {
  enum class Type { XyTwoSpin, XyChain, Pauli };
  Type type = Type::XyChain;
  int n_sites = 2;
  model::Boundary boundary = model::Boundary::Periodic;
  // Pauli type only: coefficient expressions in lambda per term.
  std::vector<std::pair<expr::Expression, std::vector<std::pair<int, model::PauliAxis>>>>
      pauli_terms;

  std::size_t dimension() const { return std::size_t{1} << n_sites; }
  ComplexMatrix build(const model::CurvePoint& pt, double lambda) const;
};

// Everything known about the state at one parameter value.
struct StateAtLambda {
  double lambda = 0.0;
  model::CurvePoint point;
  bool crossing = false;  // ground gap below the degeneracy tolerance
  DensityMatrix rho;
  std::optional<PureState> psi;  // zero-temperature mode only
  double energy = 0.0;
  double gap = 0.0;

  const PureState* pure() const { return psi ? &*psi : nullptr; }
};

// Curve + model with memoized state construction; safe to share across the
// sweep worker pool.
class CurveContext {
 public:
  CurveContext(ModelSystem system, model::CurveSpec curve,
               double degeneracy_tol = states::kDefaultDegeneracyTol)
      : system_(std::move(system)), curve_(std::move(curve)), degeneracy_tol_(degeneracy_tol) {}

  const ModelSystem& system() const { return system_; }
  const model::CurveSpec& curve() const { return curve_; }
  double degeneracy_tol() const { return degeneracy_tol_; }

  std::shared_ptr<const StateAtLambda> state_at(double lambda) const;

 private:
  ModelSystem system_;
  model::CurveSpec curve_;
  double degeneracy_tol_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const StateAtLambda>> cache_;
};

enum class EstimateKind { MeasureFirst, MeasureSecond, LineElementFirst, LineElementSecond };

struct SusceptibilityEstimate {
  double lambda = 0.0;
  double dlambda = 0.0;
  double value = 0.0;
  EstimateKind kind = EstimateKind::MeasureFirst;
  bool crossing = false;  // an endpoint sat within the degeneracy tolerance
  bool overflow = false;  // non-finite value replaced by 0
};

// One-sided rate D[rho(l + dl), rho(l)] / dl: the line element along the curve.
SusceptibilityEstimate line_element_rate(const CurveContext& ctx, double lambda, double dlambda,
                                         DistanceKind dist);

// Central first difference {M(l+dl) - M(l-dl)} / (2 dl).
SusceptibilityEstimate measure_susceptibility(const CurveContext& ctx, const MeasureKind& measure,
                                              double lambda, double dlambda);

// Central second difference {M(l+dl) - 2 M(l) + M(l-dl)} / dl^2.
SusceptibilityEstimate second_susceptibility(const CurveContext& ctx, const MeasureKind& measure,
                                             double lambda, double dlambda);

// Second derivative of accumulated arclength: one-sided line elements on each
// side give {D[rho(l+dl), rho(l)] - D[rho(l), rho(l-dl)]} / dl^2.
SusceptibilityEstimate line_element_second(const CurveContext& ctx, double lambda, double dlambda,
                                           DistanceKind dist);

enum class Classification { Finite, Divergent, Cusp };

const char* classification_name(Classification c);

struct DivergenceReport {
  double lambda_candidate = 0.0;
  Classification classification = Classification::Finite;
  std::vector<double> first_ratios;   // |v(dl/R)| / |v(dl)| per refinement
  std::vector<double> second_ratios;
  std::vector<SusceptibilityEstimate> support;
};

// First differences scaling like 1/dl mark a step (divergent); bounded first
// differences with second differences scaling like 1/dl mark a cusp. Band
// [0.9 R, 1.1 R] around the refinement factor R, i.e. [1.8, 2.2] under the
// default halving ladder.
DivergenceReport classify_divergence(const std::vector<SusceptibilityEstimate>& first,
                                     const std::vector<SusceptibilityEstimate>& second = {});

struct BerryPhaseResult {
  double analytic = 0.0;    // 2 pi <psi|O|psi>
  double integrated = 0.0;  // Simpson integral of i <psi|U^dag dU/dmu|psi>
};

// Berry phase of the cyclic family U(mu) = exp(-i mu O), mu in [0, 2pi].
// Throws NotCyclic unless U(2pi) fixes psi within 1e-8.
BerryPhaseResult berry_phase(const PureState& psi, const ComplexMatrix& generator);

double order_parameter_expectation(const PureState& psi, const ComplexMatrix& observable);

// Incoherent basis from the two proof branches of the zero-temperature
// theorem: psi_before becomes a basis vector (coherence 0), psi_after is
// guaranteed positive coherence. Orthogonal states need dimension >= 3.
IncoherentBasis theorem3_basis(const PureState& psi_before, const PureState& psi_after);

// N-spin construction: the before-state's parity sector keeps it as a basis
// element; the after-state's sector is anchored on it and Fourier-mixed.
IncoherentBasis parity_fourier_basis(int n_sites, const PureState& psi_before,
                                     const PureState& psi_after);

struct BoundCheck {
  double lhs = 0.0;  // |N_D(rho(l+dl)) - N_D(rho(l))|
  double rhs = 0.0;  // D[rho(l+dl), rho(l)]
};

// The reverse-triangle consequence of the susceptibility theorem; lhs must
// not exceed rhs beyond tolerance for any geometric quantifier sharing D.
BoundCheck verify_theorem1_bound(const CurveContext& ctx, const MeasureKind& measure,
                                 double lambda, double dlambda, DistanceKind dist);

}  // namespace qpt::probe
