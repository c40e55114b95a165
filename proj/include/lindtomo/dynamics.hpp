#pragma once

// Lindblad generators, propagation, channel representations and the diamond
// norm.
//
// Conventions: column-stacking vectorization; a Lindblad matrix L is given in
// the Pauli-tensor basis {s_i} of hermitian_basis(dim) and generates
//   drho/dt = -i[H, rho] + sum_ij L_ij (s_i rho s_j - 1/2 {s_j s_i, rho}).
// Times are in us, rates in 1/us, Hamiltonians in rad/us. Choi matrices are
// sum_ab E_ab (x) Phi(E_ab) with the input factor first, so a CPTP map has
// trace dim.

#include <vector>

#include "lindtomo/linalg.hpp"
#include "lindtomo/quantum.hpp"

namespace lindtomo {

class LindbladModel {
 public:
  // Validates Hermiticity of both matrices and PSD of the Lindblad matrix.
  static LindbladModel from(CMatrix hamiltonian, CMatrix lindblad_matrix);
  static LindbladModel trusted(CMatrix hamiltonian, CMatrix lindblad_matrix);
  static LindbladModel zero(Eigen::Index dim);

  const CMatrix& hamiltonian() const noexcept { return h_; }
  const CMatrix& lindblad_matrix() const noexcept { return l_; }
  Eigen::Index dim() const noexcept { return h_.rows(); }

 private:
  LindbladModel(CMatrix h, CMatrix l) : h_(std::move(h)), l_(std::move(l)) {}
  CMatrix h_;
  CMatrix l_;
};

// Jump operators normalized to Tr{L L^dagger} = 1 with the scale carried by
// the rates (1/us).
struct JumpDecomposition {
  std::vector<double> rates;
  std::vector<CMatrix> jump_ops;
};

struct KrausSet {
  Eigen::Index dim = 0;
  std::vector<CMatrix> operators;
  double time_us = 0.0;

  // max |sum K^dagger K - I|
  double completeness_error() const;
};

// Superoperator of -i[H, .]
CMatrix hamiltonian_superop(const CMatrix& h);
// Superoperator of L . M^dagger - 1/2 {M^dagger L, .}; with L = M this is the
// dissipator of a single jump.
CMatrix dissipator_superop(const CMatrix& l, const CMatrix& m);
CMatrix liouvillian(const LindbladModel& model);
// Generator written directly from jump operators (including any identity
// component they carry).
CMatrix liouvillian(const CMatrix& hamiltonian, const JumpDecomposition& jumps);

// exp(L t) for the model's Liouvillian.
CMatrix propagator(const LindbladModel& model, double t_us);
CMatrix apply_superop(const CMatrix& superop, const CMatrix& rho);
DensityMatrix evolve(const LindbladModel& model, const DensityMatrix& rho0, double t_us);

// Diagonalizes L = U D U^dagger; jump k is sum_i U_ik s_i / sqrt(dim) with
// rate dim * D_k. Zero (and round-off negative) eigenvalues are dropped.
JumpDecomposition jumps_from_lindblad(const LindbladModel& model);
// Inverse map. Identity components of the jumps are folded into an extra
// Hamiltonian term so the generator is unchanged; H is returned traceless.
LindbladModel lindblad_from_jumps(const CMatrix& hamiltonian, const JumpDecomposition& jumps);

CMatrix kraus_apply(const KrausSet& k, const CMatrix& rho);
DensityMatrix kraus_apply(const KrausSet& k, const DensityMatrix& rho);
CMatrix superop_from_kraus(const std::vector<CMatrix>& ops);

CMatrix choi_from_superop(const CMatrix& superop);
// Choi matrix of exp(L t).
CMatrix choi_of(const CMatrix& liouvillian, double t_us);
CMatrix choi_of(const KrausSet& k);
// Kraus operators from the Choi eigenvectors; eigenvalues below
// cutoff * Tr(choi) are dropped.
KrausSet kraus_from_choi(const CMatrix& choi, double time_us, double cutoff = 1e-8);

// Adjoint of the Frechet derivative of exp at A applied to G:
// returns X with Re<G, dexp_A(E)> = Re<X, E> for every E.
CMatrix expm_frechet_adjoint(const CMatrix& a, const CMatrix& g);

struct DiamondResult {
  double value = 0.0;   // primal (lower) value
  double bound = 0.0;   // certified dual upper bound
  int iterations = 0;
  bool converged = false;
};

struct DiamondOptions {
  double tolerance = 1e-7;  // target for bound - value
  int max_newton = 400;
};

// Diamond norm of the Hermiticity-preserving map with Choi matrix j.
DiamondResult diamond_norm(const CMatrix& j, const DiamondOptions& options = {});
// ||Phi_a - Phi_b||_diamond; throws OptimizerError when the solver does not
// reach the accuracy target.
double diamond_distance(const CMatrix& choi_a, const CMatrix& choi_b,
                        const DiamondOptions& options = {});

}  // namespace lindtomo
