#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpt/complex_matrix.hpp"
#include "qpt/expr.hpp"

namespace qpt::model {

using num::Complex;
using num::ComplexMatrix;

enum class PauliAxis { X, Y, Z };
enum class Boundary { Open, Periodic };

// One weighted Pauli string. Site indices are 1-based; site 1 occupies the
// most significant bit of the basis index, and sigma_z |0> = +|0>.
struct PauliTerm {
  double coefficient = 0.0;
  std::vector<std::pair<int, PauliAxis>> ops;
};

struct HamiltonianSpec {
  int n_sites = 0;
  std::vector<PauliTerm> terms;
  Boundary boundary = Boundary::Periodic;
};

constexpr int kMaxSites = 12;  // 2^12 = 4096 caps dense diagonalization

// Dense 2^N x 2^N matrix from iterated Kronecker products over the sites.
ComplexMatrix build_hamiltonian(const HamiltonianSpec& spec);

// Two-spin XY model:
//   H = -(1+delta)/2 XX - (1-delta)/2 YY - h/2 (Z1 + Z2)
ComplexMatrix build_xy_two_spin(double delta, double h);

// N-spin XY chain, couplings (1+-delta)/4 and field h/2 per site. Periodic
// boundary closes the ring through site N+1 == 1.
ComplexMatrix build_xy_chain(int n_sites, double delta, double h, Boundary boundary);
HamiltonianSpec xy_chain_spec(int n_sites, double delta, double h, Boundary boundary);

// Global spin flip tensor_j sigma_z_j; diagonal +-1.
ComplexMatrix parity_operator(int n_sites);

// Total magnetization sum_j sigma_z_j, optionally scaled (0.5 gives the Berry
// generator used throughout).
ComplexMatrix magnetization_z(int n_sites, double scale = 1.0);

struct CurvePoint {
  double delta = 0.0;
  double h = 0.0;
  double beta = 0.0;
  bool zero_temperature = true;
};

// lambda -> (delta, h, beta). beta absent means the T = 0 sentinel.
struct CurveSpec {
  expr::Expression delta_expr;
  expr::Expression h_expr;
  std::optional<expr::Expression> beta_expr;  // nullopt == "zero-temperature"
  double lambda_min = 0.0;
  double lambda_max = 1.0;

  bool in_range(double lambda) const;
};

CurvePoint evaluate_curve(const CurveSpec& curve, double lambda);

}  // namespace qpt::model
