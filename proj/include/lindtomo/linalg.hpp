#pragma once

// Dense complex linear algebra helpers shared by every module. Matrices are
// Eigen column-major; vectorization is column stacking throughout, so
// vec(A X B) = (B^T kron A) vec(X).

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace lindtomo {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

// Eigen-decomposition of the Hermitian part of a matrix, eigenvalues ascending.
struct HermitianEigen {
  RVector values;
  CMatrix vectors;
};

HermitianEigen hermitian_eigen(const CMatrix& m);

// max_ij |m - m^dagger|_ij
double hermiticity_error(const CMatrix& m);
CMatrix hermitian_part(const CMatrix& m);
double min_eigenvalue(const CMatrix& m);
double max_abs(const CMatrix& m);

// f applied to the spectrum of a Hermitian matrix.
CMatrix hermitian_function(const CMatrix& m, const std::function<double(double)>& f);
CMatrix hermitian_function(const HermitianEigen& eig, const std::function<double(double)>& f);

CMatrix hermitian_sqrt(const CMatrix& m);
// |M| for Hermitian M.
CMatrix hermitian_abs(const CMatrix& m);
// Trace norm of a Hermitian matrix (sum of |eigenvalues|).
double trace_norm(const CMatrix& m);

// S^{-1/2} for Hermitian positive definite S.
CMatrix inverse_sqrt(const HermitianEigen& eig);

// Adjoint action of the Frechet derivative of S -> S^{-1/2} at S (given by
// its eigen-decomposition) on a Hermitian direction X. The derivative is
// self-adjoint in the Hilbert-Schmidt inner product, so this serves both the
// forward and the gradient pass.
CMatrix inverse_sqrt_frechet(const HermitianEigen& eig, const CMatrix& x);

CMatrix kron(const CMatrix& a, const CMatrix& b);

// Column-stacking vectorization and its inverse.
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, Eigen::Index dim);

// Matrix exponential (scaling and squaring with a Pade approximant).
CMatrix expm(const CMatrix& m);

// Matrix unit |row><col| of size dim.
CMatrix matrix_unit(Eigen::Index dim, Eigen::Index row, Eigen::Index col);

}  // namespace lindtomo
