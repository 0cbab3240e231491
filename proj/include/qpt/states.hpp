#pragma once

#include <limits>
#include <vector>

#include "qpt/complex_matrix.hpp"
#include "qpt/eig.hpp"

namespace qpt::states {

using num::Complex;
using num::ComplexMatrix;
using num::CVector;

// Normalized pure state. The constructor rejects vectors whose 2-norm strays
// more than 1e-12 from unity; use normalized() when starting from raw
// amplitudes.
class PureState {
 public:
  explicit PureState(CVector amplitudes);
  static PureState normalized(CVector amplitudes);

  std::size_t dimension() const { return amplitudes_.size(); }
  const CVector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::size_t i) const { return amplitudes_[i]; }

  ComplexMatrix projector() const;

 private:
  CVector amplitudes_;
};

// Hermitian, unit-trace matrix. Hermiticity and trace are validated on
// construction (1e-12); positivity is a mathematical consequence of every
// construction path in this project (projectors, Gibbs weights, dephasings,
// unitary conjugations) and is checked spectrally only by validate_psd(),
// which tests call where the invariant is the point.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);
  static DensityMatrix from_pure(const PureState& psi);

  std::size_t dimension() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }

  double min_eigenvalue() const;
  void validate_psd(double tol = 1e-10) const;

 private:
  ComplexMatrix matrix_;
};

// Orthonormal basis stored as matrix columns; defines which states count as
// incoherent. Unitarity enforced within 1e-10.
class IncoherentBasis {
 public:
  explicit IncoherentBasis(ComplexMatrix columns);

  static IncoherentBasis computational(std::size_t dim);
  // {(|01>+|10>)/sqrt2, (|01>-|10>)/sqrt2, |00>, |11>} -- the two-qubit basis
  // that exposes the h=0 level crossing invisible to entanglement.
  static IncoherentBasis bell_type_2q();
  static IncoherentBasis from_vectors(const std::vector<CVector>& vectors);

  std::size_t dimension() const { return columns_.rows(); }
  const ComplexMatrix& columns() const { return columns_; }
  CVector vector(std::size_t i) const;

 private:
  ComplexMatrix columns_;
};

struct GroundStateResult {
  PureState state;
  double energy = 0.0;
  bool degenerate = false;
  double gap = std::numeric_limits<double>::infinity();
};

constexpr double kDefaultDegeneracyTol = 1e-9;

GroundStateResult ground_state(const ComplexMatrix& hamiltonian,
                               double degeneracy_tol = kDefaultDegeneracyTol);

// exp(-beta H)/Z. beta = 0 gives the maximally mixed state.
DensityMatrix gibbs_state(const ComplexMatrix& hamiltonian, double beta);

// Projection onto the incoherent set: keeps the diagonal of rho in basis B.
DensityMatrix dephase(const DensityMatrix& rho, const IncoherentBasis& basis);

// E^dag rho E; spectrum preserved.
DensityMatrix change_basis(const DensityMatrix& rho, const IncoherentBasis& basis);

double von_neumann_entropy(const DensityMatrix& rho);

}  // namespace qpt::states
