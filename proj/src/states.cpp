#include "qpt/states.hpp"

#include <cmath>

namespace qpt::states {

PureState::PureState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.empty()) throw Error(ErrorKind::DimensionMismatch, "empty state vector");
  const double n = num::norm2(amplitudes_);
  if (std::abs(n - 1.0) > 1e-12) {
    throw Error(ErrorKind::NotNormalized, "pure state norm deviates from 1");
  }
}

PureState PureState::normalized(CVector amplitudes) {
  const double n = num::norm2(amplitudes);
  if (n <= 0.0 || !std::isfinite(n)) {
    throw Error(ErrorKind::NotNormalized, "cannot normalize zero or non-finite vector");
  }
  for (auto& a : amplitudes) a /= n;
  return PureState(std::move(amplitudes));
}

ComplexMatrix PureState::projector() const { return num::outer(amplitudes_, amplitudes_); }

DensityMatrix::DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
  if (!matrix_.square()) throw Error(ErrorKind::NonSquare, "density matrix must be square");
  matrix_.require_finite("density matrix");
  num::require_hermitian(matrix_, 1e-12, "density matrix");
  const double tr = num::trace(matrix_).real();
  if (std::abs(tr - 1.0) > 1e-12) {
    throw Error(ErrorKind::NotDensityMatrix, "density matrix trace deviates from 1");
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(psi.projector());
}

double DensityMatrix::min_eigenvalue() const {
  return num::hermitian_eig(matrix_).eigenvalues.front();
}

void DensityMatrix::validate_psd(double tol) const {
  if (min_eigenvalue() < -tol) {
    throw Error(ErrorKind::NotDensityMatrix, "density matrix has a negative eigenvalue");
  }
}

IncoherentBasis::IncoherentBasis(ComplexMatrix columns) : columns_(std::move(columns)) {
  if (!columns_.square()) throw Error(ErrorKind::NotUnitary, "basis matrix must be square");
  const ComplexMatrix gram = num::matmul(num::adjoint(columns_), columns_);
  double worst = 0.0;
  for (std::size_t i = 0; i < gram.rows(); ++i)
    for (std::size_t j = 0; j < gram.cols(); ++j) {
      const Complex expect = (i == j) ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
      worst = std::max(worst, std::abs(gram(i, j) - expect));
    }
  if (worst > 1e-10) {
    throw Error(ErrorKind::NotUnitary, "incoherent basis is not orthonormal");
  }
}

IncoherentBasis IncoherentBasis::computational(std::size_t dim) {
  return IncoherentBasis(ComplexMatrix::identity(dim));
}

IncoherentBasis IncoherentBasis::bell_type_2q() {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix e(4, 4);
  e(1, 0) = r; e(2, 0) = r;    // (|01> + |10>)/sqrt2
  e(1, 1) = r; e(2, 1) = -r;   // (|01> - |10>)/sqrt2
  e(0, 2) = 1.0;               // |00>
  e(3, 3) = 1.0;               // |11>
  return IncoherentBasis(e);
}

IncoherentBasis IncoherentBasis::from_vectors(const std::vector<CVector>& vectors) {
  if (vectors.empty()) throw Error(ErrorKind::DimensionMismatch, "empty basis");
  const std::size_t d = vectors.front().size();
  if (vectors.size() != d) {
    throw Error(ErrorKind::DimensionMismatch, "basis needs exactly dim vectors");
  }
  ComplexMatrix e(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    if (vectors[c].size() != d) {
      throw Error(ErrorKind::DimensionMismatch, "basis vector length mismatch");
    }
    for (std::size_t r = 0; r < d; ++r) e(r, c) = vectors[c][r];
  }
  return IncoherentBasis(std::move(e));
}

CVector IncoherentBasis::vector(std::size_t i) const {
  CVector v(columns_.rows());
  for (std::size_t r = 0; r < columns_.rows(); ++r) v[r] = columns_(r, i);
  return v;
}

GroundStateResult ground_state(const ComplexMatrix& hamiltonian, double degeneracy_tol) {
  const num::EigenDecomposition ed = num::hermitian_eig(hamiltonian);
  const std::size_t n = hamiltonian.rows();
  GroundStateResult out{PureState(ed.eigenvector(0)), ed.eigenvalues[0], false,
                        std::numeric_limits<double>::infinity()};
  if (n > 1) {
    out.gap = ed.eigenvalues[1] - ed.eigenvalues[0];
    out.degenerate = out.gap < degeneracy_tol;
  }
  return out;
}

DensityMatrix gibbs_state(const ComplexMatrix& hamiltonian, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::OutOfRange, "inverse temperature must be finite and >= 0");
  }
  const num::EigenDecomposition ed = num::hermitian_eig(hamiltonian);
  const std::size_t n = hamiltonian.rows();
  // Shift by the ground energy before exponentiating so large beta cannot
  // overflow; the shift cancels in the normalization.
  const double e0 = ed.eigenvalues.front();
  std::vector<double> w(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(-beta * (ed.eigenvalues[i] - e0));
    z += w[i];
  }
  ComplexMatrix rho(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc{0.0, 0.0};
      for (std::size_t k = 0; k < n; ++k)
        acc += (w[k] / z) * ed.eigenvectors(i, k) * std::conj(ed.eigenvectors(j, k));
      rho(i, j) = acc;
    }
  // Exact symmetrization kills the last bits of roundoff skew.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
      rho(i, j) = avg;
      rho(j, i) = std::conj(avg);
    }
  return DensityMatrix(std::move(rho));
}

DensityMatrix dephase(const DensityMatrix& rho, const IncoherentBasis& basis) {
  if (rho.dimension() != basis.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "dephase dimension mismatch");
  }
  const std::size_t n = rho.dimension();
  const ComplexMatrix& e = basis.columns();
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    // p_k = <e_k| rho |e_k>
    CVector col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = e(r, k);
    const CVector re = num::mat_vec(rho.matrix(), col);
    const double p = std::max(0.0, num::inner(col, re).real());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += p * col[i] * std::conj(col[j]);
  }
  // Renormalize away the clip/roundoff drift (order 1e-15).
  const double tr = num::trace(out).real();
  out *= Complex{1.0 / tr, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (out(i, j) + std::conj(out(j, i)));
      out(i, j) = avg;
      out(j, i) = std::conj(avg);
    }
  return DensityMatrix(std::move(out));
}

DensityMatrix change_basis(const DensityMatrix& rho, const IncoherentBasis& basis) {
  if (rho.dimension() != basis.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "change_basis dimension mismatch");
  }
  ComplexMatrix m = num::matmul(num::adjoint(basis.columns()),
                                num::matmul(rho.matrix(), basis.columns()));
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = avg;
      m(j, i) = std::conj(avg);
    }
  for (std::size_t i = 0; i < n; ++i) m(i, i) = m(i, i).real();
  return DensityMatrix(std::move(m));
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const num::EigenDecomposition ed = num::hermitian_eig(rho.matrix());
  double s = 0.0;
  for (double lam : ed.eigenvalues) {
    if (lam > 1e-15) s -= lam * std::log(lam);
  }
  return s;
}

}  // namespace qpt::states
