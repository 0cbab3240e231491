#pragma once

#include <complex>
#include <random>
#include <vector>

#include "qpt/complex_matrix.hpp"
#include "qpt/states.hpp"

namespace test_helpers {

using qpt::num::Complex;
using qpt::num::ComplexMatrix;
using qpt::num::CVector;

inline ComplexMatrix random_hermitian(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = g(rng);
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex z(g(rng), g(rng));
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  }
  return m;
}

inline CVector random_pure(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(n);
  double norm_sq = 0.0;
  for (auto& x : v) {
    x = Complex(g(rng), g(rng));
    norm_sq += std::norm(x);
  }
  const double s = std::sqrt(norm_sq);
  for (auto& x : v) x /= s;
  return v;
}

// Random full-rank density matrix: normalized Wishart G G^dag / tr.
inline qpt::states::DensityMatrix random_density(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix a(n, n);
  for (auto& e : a.entries()) e = Complex(g(rng), g(rng));
  ComplexMatrix rho = qpt::num::matmul(a, qpt::num::adjoint(a));
  const double tr = qpt::num::trace(rho).real();
  rho *= Complex{1.0 / tr, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
      rho(i, j) = avg;
      rho(j, i) = std::conj(avg);
    }
  for (std::size_t i = 0; i < n; ++i) rho(i, i) = rho(i, i).real();
  return qpt::states::DensityMatrix(std::move(rho));
}

// Random unitary via Gram-Schmidt on a random complex matrix.
inline ComplexMatrix random_unitary(std::size_t n, std::mt19937& rng) {
  std::vector<CVector> cols;
  while (cols.size() < n) {
    CVector v = random_pure(n, rng);
    for (const auto& c : cols) {
      const Complex ov = qpt::num::inner(c, v);
      for (std::size_t r = 0; r < n; ++r) v[r] -= ov * c[r];
    }
    const double nn = qpt::num::norm2(v);
    if (nn < 1e-6) continue;
    for (auto& x : v) x /= nn;
    cols.push_back(std::move(v));
  }
  ComplexMatrix u(n, n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) u(r, c) = cols[c][r];
  return u;
}

}  // namespace test_helpers
