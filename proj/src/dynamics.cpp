#include "lindtomo/dynamics.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "lindtomo/error.hpp"

namespace lindtomo {

LindbladModel LindbladModel::from(CMatrix hamiltonian, CMatrix lindblad_matrix) {
  const auto d = hamiltonian.rows();
  if (hamiltonian.cols() != d || d < 2) throw DimensionError("LindbladModel: H must be square");
  if (lindblad_matrix.rows() != d * d - 1 || lindblad_matrix.cols() != d * d - 1) {
    throw DimensionError("LindbladModel: Lindblad matrix must be (dim^2-1) x (dim^2-1)");
  }
  if (hermiticity_error(hamiltonian) > kHermitianTol) {
    throw ModelError("LindbladModel: Hamiltonian is not Hermitian");
  }
  if (hermiticity_error(lindblad_matrix) > kHermitianTol) {
    throw ModelError("LindbladModel: Lindblad matrix is not Hermitian");
  }
  if (min_eigenvalue(lindblad_matrix) < kPsdFloor) {
    throw ModelError("LindbladModel: Lindblad matrix is not positive semidefinite");
  }
  return LindbladModel(std::move(hamiltonian), std::move(lindblad_matrix));
}

LindbladModel LindbladModel::trusted(CMatrix hamiltonian, CMatrix lindblad_matrix) {
  return LindbladModel(std::move(hamiltonian), std::move(lindblad_matrix));
}

LindbladModel LindbladModel::zero(Eigen::Index dim) {
  return LindbladModel(CMatrix::Zero(dim, dim), CMatrix::Zero(dim * dim - 1, dim * dim - 1));
}

double KrausSet::completeness_error() const {
  CMatrix s = CMatrix::Zero(dim, dim);
  for (const auto& k : operators) s += k.adjoint() * k;
  return max_abs(s - CMatrix::Identity(dim, dim));
}

CMatrix hamiltonian_superop(const CMatrix& h) {
  const auto d = h.rows();
  const CMatrix id = CMatrix::Identity(d, d);
  return -kI * (kron(id, h) - kron(h.transpose(), id));
}

CMatrix dissipator_superop(const CMatrix& l, const CMatrix& m) {
  const auto d = l.rows();
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix mdl = m.adjoint() * l;
  return kron(m.conjugate(), l) - 0.5 * kron(id, mdl) - 0.5 * kron(mdl.transpose(), id);
}

CMatrix liouvillian(const LindbladModel& model) {
  const auto d = model.dim();
  const HermitianBasis basis = hermitian_basis(d);
  const CMatrix& lm = model.lindblad_matrix();
  CMatrix out = hamiltonian_superop(model.hamiltonian());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const cplx c = lm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (c == cplx(0.0)) continue;
      out += c * dissipator_superop(basis.operators[i], basis.operators[j]);
    }
  }
  return out;
}

CMatrix liouvillian(const CMatrix& hamiltonian, const JumpDecomposition& jumps) {
  CMatrix out = hamiltonian_superop(hamiltonian);
  for (std::size_t k = 0; k < jumps.rates.size(); ++k) {
    out += jumps.rates[k] * dissipator_superop(jumps.jump_ops[k], jumps.jump_ops[k]);
  }
  return out;
}

CMatrix propagator(const LindbladModel& model, double t_us) {
  if (t_us < 0.0) throw ModelError("negative evolution time");
  return expm(liouvillian(model) * t_us);
}

CMatrix apply_superop(const CMatrix& superop, const CMatrix& rho) {
  const CVector v = superop * vec(rho);
  return unvec(v, rho.rows());
}

DensityMatrix evolve(const LindbladModel& model, const DensityMatrix& rho0, double t_us) {
  if (t_us < 0.0) throw ModelError("negative evolution time");
  if (model.dim() != rho0.dim()) throw DimensionError("evolve: dimension mismatch");
  if (t_us == 0.0) return rho0;
  return DensityMatrix::trusted(hermitian_part(apply_superop(propagator(model, t_us), rho0.matrix())));
}

JumpDecomposition jumps_from_lindblad(const LindbladModel& model) {
  const auto d = model.dim();
  const HermitianBasis basis = hermitian_basis(d);
  const HermitianEigen eig = hermitian_eigen(model.lindblad_matrix());
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  JumpDecomposition out;
  // Largest rate first.
  for (Eigen::Index k = eig.values.size() - 1; k >= 0; --k) {
    const double lambda = eig.values(k);
    if (lambda <= 1e-14 * scale) continue;
    CMatrix a = CMatrix::Zero(d, d);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      a += eig.vectors(static_cast<Eigen::Index>(i), k) * basis.operators[i];
    }
    const double norm2 = (a * a.adjoint()).trace().real();
    out.jump_ops.push_back(a / std::sqrt(norm2));
    out.rates.push_back(lambda * norm2);
  }
  return out;
}

LindbladModel lindblad_from_jumps(const CMatrix& hamiltonian, const JumpDecomposition& jumps) {
  const auto d = hamiltonian.rows();
  const HermitianBasis basis = hermitian_basis(d);
  const auto n = static_cast<Eigen::Index>(basis.size());
  const double dn = static_cast<double>(d);
  CMatrix h = hermitian_part(hamiltonian);
  CMatrix lm = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < jumps.rates.size(); ++k) {
    const CMatrix& jump = jumps.jump_ops[k];
    if (jump.rows() != d) throw DimensionError("jump operator dimension mismatch");
    const double g = jumps.rates[k];
    if (g < 0.0) throw ModelError("negative jump rate");
    const cplx c = jump.trace() / dn;
    CVector coeff(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      coeff(i) = (basis.operators[static_cast<std::size_t>(i)] * jump).trace() / dn;
    }
    lm += g * coeff * coeff.adjoint();
    const CMatrix a = jump - c * CMatrix::Identity(d, d);
    h += g * (0.5 * kI) * (std::conj(c) * a - c * a.adjoint());
  }
  h -= (h.trace() / dn) * CMatrix::Identity(d, d);
  return LindbladModel::trusted(hermitian_part(h), hermitian_part(lm));
}

CMatrix kraus_apply(const KrausSet& k, const CMatrix& rho) {
  if (rho.rows() != k.dim) throw DimensionError("kraus_apply: dimension mismatch");
  CMatrix out = CMatrix::Zero(k.dim, k.dim);
  for (const auto& op : k.operators) out += op * rho * op.adjoint();
  return out;
}

DensityMatrix kraus_apply(const KrausSet& k, const DensityMatrix& rho) {
  return DensityMatrix::trusted(hermitian_part(kraus_apply(k, rho.matrix())));
}

CMatrix superop_from_kraus(const std::vector<CMatrix>& ops) {
  if (ops.empty()) throw ModelError("empty Kraus set");
  const auto d = ops.front().rows();
  CMatrix s = CMatrix::Zero(d * d, d * d);
  for (const auto& k : ops) s += kron(k.conjugate(), k);
  return s;
}

CMatrix choi_from_superop(const CMatrix& superop) {
  const auto n = superop.rows();
  const auto d = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(n))));
  if (d * d != n || superop.cols() != n) throw DimensionError("superoperator is not d^2 x d^2");
  CMatrix j = CMatrix::Zero(n, n);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      // Column a + b d of the superoperator is vec(Phi(E_ab)).
      const CMatrix out = unvec(superop.col(a + b * d), d);
      j.block(a * d, b * d, d, d) = out;
    }
  }
  return j;
}

CMatrix choi_of(const CMatrix& liouvillian, double t_us) {
  if (t_us < 0.0) throw ModelError("negative evolution time");
  return choi_from_superop(expm(liouvillian * t_us));
}

CMatrix choi_of(const KrausSet& k) { return choi_from_superop(superop_from_kraus(k.operators)); }

KrausSet kraus_from_choi(const CMatrix& choi, double time_us, double cutoff) {
  const auto n = choi.rows();
  const auto d = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(n))));
  const HermitianEigen eig = hermitian_eigen(choi);
  const double tr = std::max(choi.trace().real(), 1e-300);
  KrausSet out{d, {}, time_us};
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const double lambda = eig.values(k);
    if (lambda <= cutoff * tr) continue;
    CMatrix op(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index c = 0; c < d; ++c) op(c, a) = eig.vectors(a * d + c, k);
    }
    out.operators.push_back(std::sqrt(lambda) * op);
  }
  if (out.operators.empty()) out.operators.push_back(CMatrix::Zero(d, d));
  return out;
}

CMatrix expm_frechet_adjoint(const CMatrix& a, const CMatrix& g) {
  // Upper-right block of exp([[A^dag, G], [0, A^dag]]).
  const auto n = a.rows();
  CMatrix big = CMatrix::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = a.adjoint();
  big.bottomRightCorner(n, n) = a.adjoint();
  big.topRightCorner(n, n) = g;
  const CMatrix e = big.exp();
  return e.topRightCorner(n, n);
}

}  // namespace lindtomo
