#include "qpt/complex_matrix.hpp"

#include <cmath>
#include <cstdio>

namespace qpt {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::InvalidSplit: return "InvalidSplit";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NotDensityMatrix: return "NotDensityMatrix";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::OptimizerDidNotConverge: return "OptimizerDidNotConverge";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::ExpressionError: return "ExpressionError";
    case ErrorKind::NotCyclic: return "NotCyclic";
    case ErrorKind::IdenticalStates: return "IdenticalStates";
    case ErrorKind::NotParityEigenstates: return "NotParityEigenstates";
    case ErrorKind::SameParity: return "SameParity";
    case ErrorKind::InsufficientLevels: return "InsufficientLevels";
    case ErrorKind::IncompatibleMeasure: return "IncompatibleMeasure";
    case ErrorKind::MixedStateUnsupported: return "MixedStateUnsupported";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::CacheCorrupt: return "CacheCorrupt";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace qpt

namespace qpt::num {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, CVector entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw Error(ErrorKind::DimensionMismatch, "entry count does not match rows*cols");
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) {
    throw Error(ErrorKind::DimensionMismatch, "matrix addition shape mismatch");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += rhs.entries_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) {
    throw Error(ErrorKind::DimensionMismatch, "matrix subtraction shape mismatch");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= rhs.entries_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) {
  for (auto& e : entries_) e *= scale;
  return *this;
}

void ComplexMatrix::require_finite(const char* what) const {
  for (const auto& e : entries_) {
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) {
      throw Error(ErrorKind::ExpressionError, std::string(what) + ": non-finite matrix entry");
    }
  }
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
ComplexMatrix operator*(Complex scale, ComplexMatrix m) { return m *= scale; }

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "matmul shape mismatch");
  }
  ComplexMatrix c(a.rows(), b.cols());
  // i-k-j loop order keeps the inner loop contiguous in both b and c.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex* ci = c.row_ptr(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{0.0, 0.0}) continue;
      const Complex* bk = b.row_ptr(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

ComplexMatrix adjoint(const ComplexMatrix& m) {
  ComplexMatrix r(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(j, i) = std::conj(m(i, j));
  return r;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ia = 0; ia < a.rows(); ++ia)
    for (std::size_t ja = 0; ja < a.cols(); ++ja) {
      const Complex f = a(ia, ja);
      if (f == Complex{0.0, 0.0}) continue;
      for (std::size_t ib = 0; ib < b.rows(); ++ib)
        for (std::size_t jb = 0; jb < b.cols(); ++jb)
          r(ia * b.rows() + ib, ja * b.cols() + jb) = f * b(ib, jb);
    }
  return r;
}

CVector mat_vec(const ComplexMatrix& m, const CVector& v) {
  if (m.cols() != v.size()) {
    throw Error(ErrorKind::DimensionMismatch, "matrix-vector shape mismatch");
  }
  CVector r(m.rows(), Complex{0.0, 0.0});
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const Complex* mi = m.row_ptr(i);
    Complex acc{0.0, 0.0};
    for (std::size_t j = 0; j < m.cols(); ++j) acc += mi[j] * v[j];
    r[i] = acc;
  }
  return r;
}

Complex inner(const CVector& a, const CVector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "inner product length mismatch");
  }
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm2(const CVector& v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return std::sqrt(acc);
}

Complex trace(const ComplexMatrix& m) {
  if (!m.square()) throw Error(ErrorKind::NonSquare, "trace of rectangular matrix");
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < m.rows(); ++i) acc += m(i, i);
  return acc;
}

double max_abs(const ComplexMatrix& m) {
  double best = 0.0;
  for (const auto& e : m.entries()) best = std::max(best, std::abs(e));
  return best;
}

double frobenius(const ComplexMatrix& m) {
  double acc = 0.0;
  for (const auto& e : m.entries()) acc += std::norm(e);
  return std::sqrt(acc);
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (!m.square()) throw Error(ErrorKind::NonSquare, "hermiticity check on rectangular matrix");
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j)
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
  return worst;
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  return hermiticity_defect(m) <= tol;
}

void require_hermitian(const ComplexMatrix& m, double tol, const char* what) {
  if (!m.square()) {
    throw Error(ErrorKind::NonSquare, std::string(what) + ": matrix is not square");
  }
  const double defect = hermiticity_defect(m);
  if (defect > tol) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (defect %.3e > %.3e)", defect, tol);
    throw Error(ErrorKind::NonHermitian, std::string(what) + buf);
  }
}

ComplexMatrix outer(const CVector& a, const CVector& b) {
  ComplexMatrix r(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r(i, j) = a[i] * std::conj(b[j]);
  return r;
}

}  // namespace qpt::num
