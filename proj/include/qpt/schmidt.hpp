#pragma once

#include <vector>

#include "qpt/complex_matrix.hpp"

namespace qpt::num {

// Bipartition of qubit sites 1..n_sites; side_a lists the sites kept on the
// left factor. The complement forms the right factor.
struct Bipartition {
  int n_sites = 0;
  std::vector<int> side_a;

  std::vector<int> side_b() const;
  void validate() const;  // throws InvalidSplit
};

// coefficients descend, sum of squares is 1 for a normalized input, and
// amplitudes == sum_i c_i |left_i> (x) |right_i> within 1e-10.
struct SchmidtDecomposition {
  std::vector<double> coefficients;
  std::vector<CVector> left;
  std::vector<CVector> right;

  double max_coefficient() const { return coefficients.empty() ? 0.0 : coefficients.front(); }
};

// Computed through the reduced density matrix of the smaller factor, so the
// one Hermitian eigensolver backs this too.
SchmidtDecomposition schmidt(const CVector& amplitudes, const Bipartition& split);

}  // namespace qpt::num
