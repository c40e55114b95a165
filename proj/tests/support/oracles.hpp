#pragma once

// Independent reference computations used only by the tests. None of them
// goes through the library's superoperator, expm or SDP code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "lindtomo/dynamics.hpp"
#include "lindtomo/quantum.hpp"

namespace oracle {

using lindtomo::CMatrix;
using lindtomo::cplx;
using lindtomo::kI;

// Right-hand side of the master equation written with matrix products:
// -i[H, rho] + sum_ij L_ij (s_i rho s_j - 1/2 {s_j s_i, rho}).
inline CMatrix master_rhs(const lindtomo::LindbladModel& m, const CMatrix& rho) {
  const auto basis = lindtomo::hermitian_basis(m.dim());
  const CMatrix& h = m.hamiltonian();
  CMatrix out = -kI * (h * rho - rho * h);
  const auto& lm = m.lindblad_matrix();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const cplx c = lm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (std::abs(c) == 0.0) continue;
      const CMatrix& si = basis.operators[i];
      const CMatrix& sj = basis.operators[j];
      out += c * (si * rho * sj - 0.5 * (sj * si * rho + rho * sj * si));
    }
  }
  return out;
}

// Adaptive Dormand-Prince 5(4) integration of the master equation.
inline CMatrix rk45(const lindtomo::LindbladModel& m, CMatrix rho, double t_end, double tol = 1e-12) {
  static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
  static const double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static const double b5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
  static const double b4[7] = {5179.0 / 57600,    0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200,
                               187.0 / 2100, 1.0 / 40};
  (void)c;
  double t = 0.0;
  double h = 1e-3;
  while (t < t_end) {
    h = std::min(h, t_end - t);
    CMatrix k[7];
    for (int s = 0; s < 7; ++s) {
      CMatrix y = rho;
      for (int q = 0; q < s; ++q) y += h * a[s][q] * k[q];
      k[s] = master_rhs(m, y);
    }
    CMatrix y5 = rho, y4 = rho;
    for (int s = 0; s < 7; ++s) {
      y5 += h * b5[s] * k[s];
      y4 += h * b4[s] * k[s];
    }
    const double err = (y5 - y4).cwiseAbs().maxCoeff();
    if (err <= tol || h < 1e-9) {
      t += h;
      rho = y5;
    }
    const double factor = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
  }
  return rho;
}

// Choi-like output (X (x) I) J (X^dag (x) I) for input factor first.
inline double induced_norm(const CMatrix& j, const CMatrix& sqrt_sigma) {
  const auto d = sqrt_sigma.rows();
  const CMatrix x = lindtomo::kron(sqrt_sigma, CMatrix::Identity(d, d));
  return lindtomo::trace_norm(x * j * x.adjoint());
}

inline CMatrix qubit_state(double r, double theta, double phi) {
  const double x = r * std::sin(theta) * std::cos(phi);
  const double y = r * std::sin(theta) * std::sin(phi);
  const double z = r * std::cos(theta);
  CMatrix s(2, 2);
  s << 0.5 * (1 + z), 0.5 * cplx(x, -y), 0.5 * cplx(x, y), 0.5 * (1 - z);
  return s;
}

// Diamond norm of a qubit map by exhaustive search over the ancilla
// marginal sigma: ||Phi||_dia = max_sigma ||(sqrt sigma (x) I) J (sqrt sigma (x) I)||_1.
// Grid over the Bloch ball followed by a shrinking pattern search.
inline double diamond_brute_force(const CMatrix& j) {
  const auto eval = [&](double r, double th, double ph) {
    r = std::clamp(r, 0.0, 1.0);
    return induced_norm(j, lindtomo::hermitian_sqrt(qubit_state(r, th, ph)));
  };
  double best = -1.0, br = 0, bt = 0, bp = 0;
  const int nr = 8, nt = 16, np = 32;
  for (int a = 0; a <= nr; ++a) {
    for (int b = 0; b <= nt; ++b) {
      for (int c = 0; c < np; ++c) {
        const double r = static_cast<double>(a) / nr;
        const double th = M_PI * b / nt;
        const double ph = 2 * M_PI * c / np;
        const double v = eval(r, th, ph);
        if (v > best) best = v, br = r, bt = th, bp = ph;
      }
    }
  }
  double step[3] = {0.1, 0.2, 0.2};
  while (step[0] > 1e-7) {
    bool improved = false;
    for (int k = 0; k < 3; ++k) {
      for (double sgn : {-1.0, 1.0}) {
        double p[3] = {br, bt, bp};
        p[k] += sgn * step[k];
        const double v = eval(p[0], p[1], p[2]);
        if (v > best) {
          best = v;
          br = std::clamp(p[0], 0.0, 1.0);
          bt = p[1];
          bp = p[2];
          improved = true;
        }
      }
    }
    if (!improved) {
      for (double& s : step) s *= 0.5;
    }
  }
  return best;
}

inline CMatrix random_matrix(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) m(r, c) = cplx(n(rng), n(rng));
  }
  return m;
}

inline CMatrix random_hermitian(std::mt19937_64& rng, int d, double scale = 1.0) {
  const CMatrix m = random_matrix(rng, d);
  return scale * 0.5 * (m + m.adjoint());
}

inline CMatrix random_state(std::mt19937_64& rng, int d) {
  const CMatrix a = random_matrix(rng, d);
  const CMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// Random trace-preserving Kraus set of the given rank: columns of a random
// isometry V (d*rank x d) sliced into d x d blocks.
inline std::vector<CMatrix> random_kraus(std::mt19937_64& rng, int d, int rank) {
  CMatrix g(d * rank, d);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int r = 0; r < d * rank; ++r) {
    for (int c = 0; c < d; ++c) g(r, c) = cplx(n(rng), n(rng));
  }
  const Eigen::HouseholderQR<CMatrix> qr(g);
  const CMatrix v = qr.householderQ() * CMatrix::Identity(d * rank, d);
  std::vector<CMatrix> ops;
  for (int k = 0; k < rank; ++k) ops.push_back(v.block(k * d, 0, d, d));
  return ops;
}

// Random valid model: Hermitian H and PSD Lindblad matrix with rates up to max_rate.
inline lindtomo::LindbladModel random_model(std::mt19937_64& rng, int d, double h_scale,
                                            double max_rate) {
  const int m = d * d - 1;
  const CMatrix a = random_matrix(rng, m);
  CMatrix l = a * a.adjoint();
  l *= max_rate / std::max(1e-12, lindtomo::hermitian_eigen(l).values.maxCoeff()) / d;
  CMatrix h = random_hermitian(rng, d, h_scale);
  h -= (h.trace() / static_cast<double>(d)) * CMatrix::Identity(d, d);
  return lindtomo::LindbladModel::from(h, lindtomo::hermitian_part(l));
}

inline CMatrix pauli(char p) {
  CMatrix m(2, 2);
  switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -kI, kI, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m = CMatrix::Identity(2, 2);
  }
  return m;
}

// Pure ZZ Hamiltonian (omega_zz / 4) Z (x) Z in rad/us.
inline CMatrix zz_hamiltonian(double omega_zz) {
  return 0.25 * omega_zz * lindtomo::kron(pauli('Z'), pauli('Z'));
}

// Unitary Kraus set of exp(-i H t) written from the diagonal directly.
inline CMatrix diagonal_unitary(const CMatrix& h_diag, double t) {
  CMatrix u = CMatrix::Zero(h_diag.rows(), h_diag.rows());
  for (Eigen::Index k = 0; k < h_diag.rows(); ++k) u(k, k) = std::exp(-kI * h_diag(k, k).real() * t);
  return u;
}

// Channel on qubit A of the unitary u acting on A (x) B with B fixed in
// env: Kraus operators <b| u |env_k> sqrt(p_k) over an eigenbasis of env.
inline lindtomo::KrausSet marginal_channel(const CMatrix& u, const CMatrix& env, double t) {
  lindtomo::KrausSet k{2, {}, t};
  const auto eig = lindtomo::hermitian_eigen(env);
  for (int e = 0; e < 2; ++e) {
    const double pe = eig.values(e);
    if (pe <= 1e-15) continue;
    for (int b = 0; b < 2; ++b) {
      CMatrix op = CMatrix::Zero(2, 2);
      for (int a_out = 0; a_out < 2; ++a_out) {
        for (int a_in = 0; a_in < 2; ++a_in) {
          cplx s = 0.0;
          for (int bi = 0; bi < 2; ++bi) s += u(2 * a_out + b, 2 * a_in + bi) * eig.vectors(bi, e);
          op(a_out, a_in) = std::sqrt(pe) * s;
        }
      }
      k.operators.push_back(op);
    }
  }
  return k;
}

}  // namespace oracle
