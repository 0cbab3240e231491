#include "qpt/schmidt.hpp"

#include <algorithm>
#include <cmath>

#include "qpt/eig.hpp"

namespace qpt::num {

std::vector<int> Bipartition::side_b() const {
  std::vector<bool> in_a(static_cast<std::size_t>(n_sites) + 1, false);
  for (int s : side_a) {
    if (s < 1 || s > n_sites) throw Error(ErrorKind::InvalidSplit, "site index out of range");
    if (in_a[static_cast<std::size_t>(s)]) throw Error(ErrorKind::InvalidSplit, "duplicate site in split");
    in_a[static_cast<std::size_t>(s)] = true;
  }
  std::vector<int> b;
  for (int s = 1; s <= n_sites; ++s)
    if (!in_a[static_cast<std::size_t>(s)]) b.push_back(s);
  return b;
}

void Bipartition::validate() const {
  if (n_sites < 1) throw Error(ErrorKind::InvalidSplit, "empty system");
  const auto b = side_b();
  if (side_a.empty() || b.empty()) {
    throw Error(ErrorKind::InvalidSplit, "split must leave sites on both sides");
  }
}

namespace {

// Site bit convention: site j occupies bit (n_sites - j), i.e. site 1 is the
// most significant bit of the basis index.
std::size_t gather_bits(std::size_t x, const std::vector<int>& sites, int n_sites) {
  std::size_t out = 0;
  for (int s : sites) {
    out <<= 1;
    out |= (x >> (n_sites - s)) & 1u;
  }
  return out;
}

}  // namespace

SchmidtDecomposition schmidt(const CVector& amplitudes, const Bipartition& split) {
  split.validate();
  const std::size_t dim = amplitudes.size();
  if (dim != (std::size_t{1} << split.n_sites)) {
    throw Error(ErrorKind::InvalidSplit, "state dimension does not match site count");
  }
  const double nrm = norm2(amplitudes);
  if (std::abs(nrm - 1.0) > 1e-12) {
    throw Error(ErrorKind::NotNormalized, "schmidt input state is not normalized");
  }

  std::vector<int> sa = split.side_a;
  std::sort(sa.begin(), sa.end());
  const std::vector<int> sb = split.side_b();
  const std::size_t da = std::size_t{1} << sa.size();
  const std::size_t db = dim / da;

  // Reshape |psi> into the da x db amplitude matrix.
  ComplexMatrix amp(da, db);
  for (std::size_t x = 0; x < dim; ++x) {
    const std::size_t ra = gather_bits(x, sa, split.n_sites);
    const std::size_t rb = gather_bits(x, sb, split.n_sites);
    amp(ra, rb) = amplitudes[x];
  }

  const bool a_small = da <= db;
  const ComplexMatrix amp_dag = adjoint(amp);
  const ComplexMatrix rho = a_small ? matmul(amp, amp_dag) : matmul(amp_dag, amp);
  const EigenDecomposition ed = hermitian_eig(rho);

  const std::size_t k = std::min(da, db);
  SchmidtDecomposition out;
  out.coefficients.resize(k);
  out.left.resize(k);
  out.right.resize(k);

  for (std::size_t i = 0; i < k; ++i) {
    // eigenvalues ascend; take them from the top.
    const std::size_t src = rho.rows() - 1 - i;
    const double lam = std::max(0.0, ed.eigenvalues[src]);
    const double c = std::sqrt(lam);
    out.coefficients[i] = c;
    CVector small_vec = ed.eigenvector(src);
    CVector partner;
    if (c > 1e-12) {
      if (a_small) {
        // amplitudes_ab = sum_i c_i left_i[a] right_i[b], so the right family
        // is the conjugate of M^dag u / c.
        partner = mat_vec(amp_dag, small_vec);
        for (auto& x : partner) x = std::conj(x) / c;
      } else {
        partner = mat_vec(amp, small_vec);
        for (auto& x : partner) x /= c;
      }
    } else {
      partner.assign(a_small ? db : da, Complex{0.0, 0.0});
    }
    if (a_small) {
      out.left[i] = std::move(small_vec);
      out.right[i] = std::move(partner);
    } else {
      out.left[i] = std::move(partner);
      for (auto& x : small_vec) x = std::conj(x);
      out.right[i] = std::move(small_vec);
    }
  }

  // Complete partners for (near-)zero coefficients by Gram-Schmidt over the
  // canonical basis so both families stay orthonormal.
  auto complete = [](std::vector<CVector>& vecs, std::size_t dim_v, std::size_t from) {
    std::size_t seed = 0;
    for (std::size_t i = from; i < vecs.size(); ++i) {
      for (; seed <= dim_v; ++seed) {
        if (seed == dim_v) throw Error(ErrorKind::InvalidSplit, "schmidt completion failed");
        CVector w(dim_v, Complex{0.0, 0.0});
        w[seed] = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
          const Complex ov = inner(vecs[j], w);
          for (std::size_t r = 0; r < dim_v; ++r) w[r] -= ov * vecs[j][r];
        }
        const double wn = norm2(w);
        if (wn > 1e-6) {
          for (auto& x : w) x /= wn;
          vecs[i] = std::move(w);
          ++seed;
          break;
        }
      }
    }
  };
  std::size_t first_zero = k;
  for (std::size_t i = 0; i < k; ++i) {
    if (out.coefficients[i] <= 1e-12) {
      first_zero = i;
      break;
    }
  }
  // The eigensolver side is already phase-fixed; the derived side must keep
  // the induced phase or the reconstruction breaks. Only zero-coefficient
  // fills are free to be normalized.
  if (first_zero < k) {
    auto& fills = a_small ? out.right : out.left;
    complete(fills, a_small ? db : da, first_zero);
    for (std::size_t i = first_zero; i < k; ++i) phase_fix(fills[i]);
  }
  return out;
}

}  // namespace qpt::num
