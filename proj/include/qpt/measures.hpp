#pragma once

#include <memory>
#include <optional>
#include <string>

#include "qpt/schmidt.hpp"
#include "qpt/states.hpp"

namespace qpt::measures {

using num::Bipartition;
using num::Complex;
using num::ComplexMatrix;
using num::CVector;
using states::DensityMatrix;
using states::IncoherentBasis;
using states::PureState;

// Distance conventions: trace carries the 1/2 factor, l1 does not; this is
// what makes C_l1(g-) = 1 come out in the computational basis.
enum class DistanceKind { L1Entrywise, Trace, HilbertSchmidt };

const char* distance_name(DistanceKind kind);

double distance(const DensityMatrix& rho, const DensityMatrix& sigma, DistanceKind kind);

// Sum of |rho_ij| over i != j, taken in basis B.
double coherence_l1(const DensityMatrix& rho, const IncoherentBasis& basis);

// S(dephase(rho)) - S(rho); the closed form of the relative-entropy distance
// to the incoherent set.
double coherence_relative_entropy(const DensityMatrix& rho, const IncoherentBasis& basis);

// min over incoherent sigma of distance(rho, sigma, kind). Hilbert-Schmidt
// resolves in closed form (the dephased state is the minimizer); the other
// kinds run the simplex minimizer.
double geometric_coherence(const DensityMatrix& rho, const IncoherentBasis& basis,
                           DistanceKind kind);

// The minimizer path regardless of kind; used to cross-check the closed forms.
// Projected subgradient with diminishing step from the dephased and uniform
// starts, then pairwise line-search polish. Throws OptimizerDidNotConverge if
// the first-order residual stays above 1e-8 at the iteration cap.
double geometric_coherence_minimized(const DensityMatrix& rho, const IncoherentBasis& basis,
                                     DistanceKind kind);

// 1 - (largest Schmidt coefficient)^2 across the split.
double geometric_entanglement(const PureState& psi, const Bipartition& split);

// Squared Hilbert-Schmidt distance to the nearest classical-quantum state,
// measurements on qubit A (site 1). 64x64 Bloch-angle grid then Nelder-Mead.
double geometric_discord_2q(const DensityMatrix& rho);

// ---------------------------------------------------------------------------

enum class MeasureTag {
  CoherenceL1,
  CoherenceRelativeEntropy,
  GeometricCoherence,
  GeometricEntanglement,
  GeometricDiscord2q,
};

// A measure plus everything needed to evaluate it on a state. Coherence-type
// measures carry the incoherent basis; entanglement carries the split.
struct MeasureKind {
  MeasureTag tag = MeasureTag::CoherenceL1;
  DistanceKind dist = DistanceKind::HilbertSchmidt;  // GeometricCoherence only
  std::shared_ptr<const IncoherentBasis> basis;
  std::optional<Bipartition> split;

  bool coherence_type() const;
  std::string name() const;  // measure identity without the basis label
};

// psi may be null for measures that work on density matrices; entanglement
// requires it.
double evaluate_measure(const MeasureKind& kind, const DensityMatrix& rho,
                        const PureState* psi);

// The metric-compatible form of a measure for reverse-triangle checks:
// value v and distance D such that |v(rho1) - v(rho2)| <= D(rho1, rho2).
// Entanglement maps to sqrt(2 E), discord to sqrt(value), both paired with
// the Hilbert-Schmidt distance. Relative entropy has no metric and throws.
struct DistanceFormValue {
  double value = 0.0;
  DistanceKind dist = DistanceKind::HilbertSchmidt;
};
DistanceFormValue nonclassicality_distance_form(const MeasureKind& kind,
                                                const DensityMatrix& rho,
                                                const PureState* psi);

}  // namespace qpt::measures
