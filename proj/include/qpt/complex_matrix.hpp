#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qpt/error.hpp"

namespace qpt::num {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

// Dense complex matrix, row-major. All heavy linear algebra in the project
// runs through this type; dimensions stay small enough (<= 4096) that dense
// storage is the simplest correct choice.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, Complex{0.0, 0.0}) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, CVector entries);

  static ComplexMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  Complex* row_ptr(std::size_t i) { return entries_.data() + i * cols_; }
  const Complex* row_ptr(std::size_t i) const { return entries_.data() + i * cols_; }

  const CVector& entries() const { return entries_; }
  CVector& entries() { return entries_; }

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(Complex scale);

  // Throws if any entry is NaN or infinite.
  void require_finite(const char* what) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  CVector entries_;
};

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(Complex scale, ComplexMatrix m);

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix adjoint(const ComplexMatrix& m);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

CVector mat_vec(const ComplexMatrix& m, const CVector& v);
Complex inner(const CVector& a, const CVector& b);    // <a|b>, conjugate-linear in a
double norm2(const CVector& v);

Complex trace(const ComplexMatrix& m);
double max_abs(const ComplexMatrix& m);               // entrywise max modulus
double frobenius(const ComplexMatrix& m);
double hermiticity_defect(const ComplexMatrix& m);    // ||M - M^dag||_max

// ||M - M^dag||_max <= tol, throws NonSquare for rectangular input.
bool is_hermitian(const ComplexMatrix& m, double tol);
void require_hermitian(const ComplexMatrix& m, double tol, const char* what);

ComplexMatrix outer(const CVector& a, const CVector& b);  // |a><b|

}  // namespace qpt::num
