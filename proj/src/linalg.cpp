#include "lindtomo/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace lindtomo {

HermitianEigen hermitian_eigen(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double hermiticity_error(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

double min_eigenvalue(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

CMatrix hermitian_function(const HermitianEigen& eig, const std::function<double(double)>& f) {
  RVector fv = eig.values.unaryExpr(f);
  return eig.vectors * fv.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
}

CMatrix hermitian_function(const CMatrix& m, const std::function<double(double)>& f) {
  return hermitian_function(hermitian_eigen(m), f);
}

CMatrix hermitian_sqrt(const CMatrix& m) {
  return hermitian_function(m, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

CMatrix hermitian_abs(const CMatrix& m) {
  return hermitian_function(m, [](double x) { return std::abs(x); });
}

double trace_norm(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum();
}

CMatrix inverse_sqrt(const HermitianEigen& eig) {
  return hermitian_function(eig, [](double x) { return 1.0 / std::sqrt(x); });
}

CMatrix inverse_sqrt_frechet(const HermitianEigen& eig, const CMatrix& x) {
  const auto n = eig.values.size();
  CMatrix y = eig.vectors.adjoint() * x * eig.vectors;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double la = eig.values(a);
      const double lb = eig.values(b);
      double dd;
      if (std::abs(la - lb) <= 1e-12 * std::max(1.0, std::abs(la))) {
        dd = -0.5 * std::pow(0.5 * (la + lb), -1.5);
      } else {
        dd = (1.0 / std::sqrt(la) - 1.0 / std::sqrt(lb)) / (la - lb);
      }
      y(a, b) *= dd;
    }
  }
  return eig.vectors * y * eig.vectors.adjoint();
}

CMatrix kron(const CMatrix& a, const CMatrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

CVector vec(const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); }

CMatrix unvec(const CVector& v, Eigen::Index dim) {
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

CMatrix expm(const CMatrix& m) { return m.exp(); }

CMatrix matrix_unit(Eigen::Index dim, Eigen::Index row, Eigen::Index col) {
  CMatrix e = CMatrix::Zero(dim, dim);
  e(row, col) = 1.0;
  return e;
}

}  // namespace lindtomo
