#pragma once

// Per-time maximum-likelihood estimation of trace-preserving Kraus sets
// given a SPAM estimate.

#include <string>
#include <vector>

#include "lindtomo/dynamics.hpp"
#include "lindtomo/optimizer.hpp"
#include "lindtomo/spam_fit.hpp"

namespace lindtomo {

struct KrausFitTime {
  double time_us = 0.0;
  KrausSet kraus;
  double loglike = 0.0;
  FitReport report;
  bool ok = true;        // false when the optimizer failed at this time
  std::string message;
};

struct KrausEstimate {
  int n_qubits = 1;
  std::vector<KrausFitTime> fits;  // strictly increasing times

  bool ok() const;
  std::vector<KrausSet> channels() const;
};

struct KrausFitOptions {
  // Start each time from the previous time's estimate instead of the
  // decay pre-fit; the default keeps the fits independent.
  bool warm_start = false;
};

// Log-likelihood of the records of data at time t under the channel k.
double loglike_kraus(const KrausSet& k, const SpamEstimate& spam, const Dataset& data, double t_us);

KrausEstimate fit_kraus(const Dataset& data, const SpamEstimate& spam,
                        const OptimizerConfig& config = {}, const KrausFitOptions& options = {});

// Physics-informed starting Kraus set at time t: amplitude damping plus
// dephasing per qubit from the pre-fit, tensored for two qubits, with
// vanishing operators replaced by small distinct Pauli terms.
std::vector<CMatrix> kraus_start(const Dataset& data, double t_us);

}  // namespace lindtomo
