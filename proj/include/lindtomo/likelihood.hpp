#pragma once

// Shared multinomial log-likelihood machinery. Every estimator reduces to
//   l = sum_{t, s, b, o} n(t, s, b, o) ln max(Tr[X_s(t) E_bo], 1e-12)
// with X_s(t) the evolved prepared states and E_bo = R_b^dagger M_o R_b the
// effective effects; the probability table is one real matrix product.

#include <vector>

#include "lindtomo/quantum.hpp"
#include "lindtomo/synthdata.hpp"

namespace lindtomo {

inline constexpr double kProbFloor = 1e-12;

// Counts at one time as an (effect x preparation) table; effect index is
// basis * n_outcomes + outcome. Missing records contribute zero counts.
struct ShotSlice {
  double time_us = 0.0;
  RMatrix counts;
  double total_shots = 0.0;
};

struct ShotTable {
  int n_qubits = 1;
  Eigen::Index dim = 2;
  int n_preps = 0;
  int n_bases = 0;
  int n_outcomes = 0;
  std::vector<ShotSlice> slices;  // one per dataset time, increasing

  static ShotTable from(const Dataset& data);
  int n_effects() const { return n_bases * n_outcomes; }
  // Records present per preparation (any basis, any time).
  std::vector<bool> preps_used() const;
};

// Real coordinates of a Hermitian matrix, [Re vec X; Im vec X], so that
// Tr[X E] = flat(X) . flat(E) for Hermitian X, E.
void flatten_hermitian(const CMatrix& x, double* out);
CMatrix unflatten_hermitian(const double* flat, Eigen::Index dim);
RMatrix flatten_all(const std::vector<CMatrix>& xs);

class EffectTable {
 public:
  EffectTable(const Povm& povm, int n_qubits);

  const std::vector<CMatrix>& effects() const noexcept { return effects_; }
  // n_effects x 2 dim^2 and its transpose.
  const RMatrix& rows() const noexcept { return rows_; }
  const RMatrix& cols() const noexcept { return cols_; }

 private:
  std::vector<CMatrix> effects_;
  RMatrix rows_;
  RMatrix cols_;
};

// R_s rho0 R_s^dagger for every preparation index.
std::vector<CMatrix> prepared_states(const CMatrix& rho0, int n_qubits);

// Log-likelihood of one slice given flattened states (2 dim^2 x n_preps).
// When ratio is given it receives counts / p (0 where clamped), the
// derivative of l with respect to each probability. Returns -inf when a
// probability leaves [0, 1] by more than 1e-6.
double slice_loglike(const EffectTable& effects, const RMatrix& states_flat, const RMatrix& counts,
                     RMatrix* ratio);
// Flattened sum_e ratio(e, s) E_e per preparation: dl/dX_s.
RMatrix state_gradients(const EffectTable& effects, const RMatrix& ratio);
// Flattened sum_s ratio(e, s) X_s per effect: dl/dE_e.
RMatrix effect_gradients(const RMatrix& states_flat, const RMatrix& ratio);

}  // namespace lindtomo
