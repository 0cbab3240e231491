#include "qpt/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpt::num {

namespace {

constexpr double kStopFactor = 1e-14;       // off-diagonal mass target, relative to ||M||_F
constexpr double kDegenerateGap = 1e-9;     // cluster width for gauge fixing
constexpr int kMaxSweeps = 100;

double offdiag_frobenius(const ComplexMatrix& a) {
  const std::size_t n = a.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex* row = a.row_ptr(i);
    for (std::size_t j = i + 1; j < n; ++j) acc += std::norm(row[j]);
  }
  return std::sqrt(2.0 * acc);
}

}  // namespace

CVector EigenDecomposition::eigenvector(std::size_t i) const {
  CVector v(eigenvectors.rows());
  for (std::size_t r = 0; r < eigenvectors.rows(); ++r) v[r] = eigenvectors(r, i);
  return v;
}

void phase_fix(CVector& v) {
  for (const auto& x : v) {
    const double ax = std::abs(x);
    if (ax > 1e-12) {
      const Complex phase = std::conj(x) / ax;
      for (auto& y : v) y *= phase;
      return;
    }
  }
}

EigenDecomposition hermitian_eig(const ComplexMatrix& m) {
  require_hermitian(m, 1e-12, "hermitian_eig");
  const std::size_t n = m.rows();

  // Working copy A and accumulated transform stored transposed: vt row i holds
  // eigenvector i, so every rotation touches two contiguous rows.
  ComplexMatrix a = m;
  std::vector<Complex> vt(n * n, Complex{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;

  const double norm_m = frobenius(m);
  const double stop = kStopFactor * (norm_m > 0.0 ? norm_m : 1.0);
  const double skip = stop / static_cast<double>(n > 0 ? n : 1);

  int sweep = 0;
  while (n > 1) {
    const double off = offdiag_frobenius(a);
    if (off <= stop) break;
    if (++sweep > kMaxSweeps) {
      throw Error(ErrorKind::OptimizerDidNotConverge, "jacobi sweep limit exceeded");
    }
    // Larger threshold for the first sweeps avoids chasing elements that a
    // later rotation would reintroduce anyway.
    const double thresh = std::max(skip, sweep <= 3 ? 0.05 * off / static_cast<double>(n) : 0.0);

    for (std::size_t p = 0; p < n - 1; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex b = a(p, q);
        const double ab = std::abs(b);
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        if (ab <= thresh) {
          // Annihilate negligible elements outright once converged nearby.
          if (sweep > 4 && ab <= 1e-16 * (std::abs(app) + std::abs(aqq))) {
            a(p, q) = 0.0;
            a(q, p) = 0.0;
          }
          continue;
        }

        // Phase and tangent of the annihilating rotation.
        const double br = b.real() / ab, bi = b.imag() / ab;  // e^{i beta}
        const double theta = (aqq - app) / (2.0 * ab);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // G columns: col_p = (c, -s e^{-i beta}), col_q = (s, c e^{-i beta}).
        // Row update (A <- G^dag A):
        //   row_p' = c row_p - s e^{+i beta} row_q
        //   row_q' = s row_p + c e^{+i beta} row_q  ... with e^{+i beta} = (br, bi)
        {
          Complex* rp = a.row_ptr(p);
          Complex* rq = a.row_ptr(q);
          for (std::size_t j = 0; j < n; ++j) {
            const double pr = rp[j].real(), pi = rp[j].imag();
            const double qr = rq[j].real(), qi = rq[j].imag();
            const double eqr = br * qr - bi * qi;  // e^{i beta} * q
            const double eqi = br * qi + bi * qr;
            rp[j] = Complex(c * pr - s * eqr, c * pi - s * eqi);
            rq[j] = Complex(s * pr + c * eqr, s * pi + c * eqi);
          }
        }
        // Column update (A <- A G):
        //   col_p' = c col_p - s e^{-i beta} col_q
        //   col_q' = s col_p + c e^{-i beta} col_q
        {
          for (std::size_t i = 0; i < n; ++i) {
            Complex* row = a.row_ptr(i);
            const double pr = row[p].real(), pi = row[p].imag();
            const double qr = row[q].real(), qi = row[q].imag();
            const double eqr = br * qr + bi * qi;  // e^{-i beta} * q
            const double eqi = br * qi - bi * qr;
            row[p] = Complex(c * pr - s * eqr, c * pi - s * eqi);
            row[q] = Complex(s * pr + c * eqr, s * pi + c * eqi);
          }
        }
        // Eigenvector accumulation (V <- V G), on transposed storage.
        {
          Complex* wp = vt.data() + p * n;
          Complex* wq = vt.data() + q * n;
          for (std::size_t j = 0; j < n; ++j) {
            const double pr = wp[j].real(), pi = wp[j].imag();
            const double qr = wq[j].real(), qi = wq[j].imag();
            const double eqr = br * qr + bi * qi;  // e^{-i beta} * q
            const double eqi = br * qi - bi * qr;
            wp[j] = Complex(c * pr - s * eqr, c * pi - s * eqi);
            wq[j] = Complex(s * pr + c * eqr, s * pi + c * eqi);
          }
        }

        // Exact pivot results, independent of the generic updates above.
        a(p, p) = app - t * ab;
        a(q, q) = aqq + t * ab;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  // Sort ascending; index tiebreak keeps the order reproducible.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i).real();
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (diag[x] != diag[y]) return diag[x] < diag[y];
    return x < y;
  });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  std::vector<CVector> vecs(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.eigenvalues[i] = diag[order[i]];
    vecs[i].assign(vt.begin() + static_cast<std::ptrdiff_t>(order[i] * n),
                   vt.begin() + static_cast<std::ptrdiff_t>((order[i] + 1) * n));
  }

  // Gauge-fix degenerate clusters: rebuild the cluster's orthonormal set from
  // canonical basis projections so the output does not depend on rotation
  // history.
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && out.eigenvalues[end] - out.eigenvalues[end - 1] < kDegenerateGap) ++end;
    const std::size_t k = end - start;
    if (k >= 2) {
      std::vector<CVector> fresh;
      fresh.reserve(k);
      for (double accept_tol : {1e-6, 1e-12}) {
        for (std::size_t e = 0; e < n && fresh.size() < k; ++e) {
          // w = P |e>, P the cluster projector.
          CVector w(n, Complex{0.0, 0.0});
          for (std::size_t c = start; c < end; ++c) {
            const Complex coef = std::conj(vecs[c][e]);
            for (std::size_t r = 0; r < n; ++r) w[r] += coef * vecs[c][r];
          }
          for (const auto& f : fresh) {
            const Complex ov = inner(f, w);
            for (std::size_t r = 0; r < n; ++r) w[r] -= ov * f[r];
          }
          const double wn = norm2(w);
          if (wn > accept_tol) {
            for (auto& x : w) x /= wn;
            fresh.push_back(std::move(w));
          }
        }
        if (fresh.size() == k) break;
      }
      if (fresh.size() == k) {
        for (std::size_t c = 0; c < k; ++c) vecs[start + c] = std::move(fresh[c]);
      }
    }
    start = end;
  }

  for (auto& v : vecs) phase_fix(v);

  out.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = vecs[c][r];
  return out;
}

ComplexMatrix hermitian_function(const ComplexMatrix& m, MatrixFn fn, double beta) {
  const EigenDecomposition ed = hermitian_eig(m);
  const std::size_t n = m.rows();
  std::vector<double> fv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ed.eigenvalues[i];
    switch (fn) {
      case MatrixFn::ExpScaled:
        fv[i] = std::exp(-beta * x);
        break;
      case MatrixFn::XLogX:
        fv[i] = x > 0.0 ? x * std::log(x) : 0.0;
        break;
    }
  }
  // Assemble the upper triangle and mirror it so the result is Hermitian to
  // the bit even when f blows the scale up.
  ComplexMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      Complex acc{0.0, 0.0};
      for (std::size_t k = 0; k < n; ++k)
        acc += fv[k] * ed.eigenvectors(i, k) * std::conj(ed.eigenvectors(j, k));
      if (i == j) {
        out(i, i) = acc.real();
      } else {
        out(i, j) = acc;
        out(j, i) = std::conj(acc);
      }
    }
  }
  return out;
}

}  // namespace qpt::num
