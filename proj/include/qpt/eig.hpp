#pragma once

#include <vector>

#include "qpt/complex_matrix.hpp"

namespace qpt::num {

// Full spectrum of a Hermitian matrix. Eigenvalues ascend; eigenvector i is
// column i of `eigenvectors`. Ordering and gauge are deterministic: within a
// degenerate cluster (gap < 1e-9) the vectors are re-built by Gram-Schmidt
// from canonical basis projections, and every vector has its first
// non-negligible component made real positive.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;

  CVector eigenvector(std::size_t i) const;
};

// Cyclic Jacobi with threshold skipping; iterates until the off-diagonal
// Frobenius mass drops below 1e-14 * ||M||_F. Unconditionally convergent for
// Hermitian input, bit-stable across runs.
EigenDecomposition hermitian_eig(const ComplexMatrix& m);

// Tags for the spectral function calculus. ExpScaled applies x -> exp(-beta*x)
// (shifted internally by the minimum eigenvalue to avoid overflow is NOT done
// here; callers that need a normalized result handle the shift), XLogX applies
// x -> x*ln(x) with 0*ln(0) = 0.
enum class MatrixFn { ExpScaled, XLogX };

ComplexMatrix hermitian_function(const ComplexMatrix& m, MatrixFn fn, double beta = 0.0);

// Phase convention used across the project: first component with modulus
// above 1e-12 is rotated to the positive real axis.
void phase_fix(CVector& v);

}  // namespace qpt::num
