#pragma once

// Maximum-likelihood estimation of the initial state and the measurement
// POVM from the zero-delay records of a dataset.

#include "lindtomo/likelihood.hpp"
#include "lindtomo/optimizer.hpp"
#include "lindtomo/synthdata.hpp"

namespace lindtomo {

struct SpamEstimate {
  DensityMatrix rho0;
  Povm povm;
  double loglike = 0.0;
  FitReport report;

  int n_qubits() const { return qubits_for_dim(rho0.dim()); }
};

// Records of data at time 0 as a single-time dataset.
Dataset zero_delay_slice(const Dataset& data);

// sum over records and outcomes of n ln max(Tr[rho_s R_b^dag M_o R_b], 1e-12).
// Every record must have time 0.
double loglike_spam(const DensityMatrix& rho0, const Povm& povm, const Dataset& slice);

// Optimizer start: ground state and projective z POVM, each mixed with 2%
// of the identity so that no Cholesky factor starts on the boundary.
SpamTruth spam_start(int n_qubits);
SpamEstimate fit_spam(const Dataset& data, const OptimizerConfig& config = {});

// Moves the estimate along the directions the likelihood cannot see (per
// qubit-support sector, Bloch components of rho0 scaled by 1/u and of the
// POVM by u) to the representative with the largest POVM contrast that keeps
// both objects physical.
void fix_spam_gauge(CMatrix& rho0, std::vector<CMatrix>& povm);

Povm product_povm(const Povm& a, const Povm& b);

// max over states rho of D(Lambda(rho), Lambda'(rho)) for the
// outcome-forgetting channels of two POVMs.
double measurement_channel_distance(const Povm& joint, const Povm& product,
                                    const OptimizerConfig& config = {});

struct ThermalFit {
  double a = 1.0;
  double distance = 0.0;
};

// Closest a |0><0| + (1 - a) |1><1| in trace distance; golden section, 1e-4.
ThermalFit thermal_fit(const DensityMatrix& rho0);

}  // namespace lindtomo
