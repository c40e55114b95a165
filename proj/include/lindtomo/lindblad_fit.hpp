#pragma once

// Maximum-likelihood estimation of a time-independent Hamiltonian and
// Lindblad matrix from all delay times at once, in a free mode (full PSD
// Lindblad matrix) and a restricted mode (rates of fixed damping and
// dephasing jumps only).

#include <memory>
#include <string>
#include <vector>

#include "lindtomo/dynamics.hpp"
#include "lindtomo/optimizer.hpp"
#include "lindtomo/spam_fit.hpp"

namespace lindtomo {

enum class LindbladMode { free, restricted };

std::string_view to_string(LindbladMode m);
LindbladMode parse_mode(std::string_view text);

// Fixed jumps of the restricted mode, normalized Tr{L L^dagger} = 1.
// One qubit: {a, d} = {|0><1|, diag(1, -1)/sqrt 2}. Two qubits:
// {a1, a2, d1, d2} with a1/d1 acting on qubit B and a2/d2 on qubit A.
struct RestrictedJumps {
  std::vector<std::string> names;
  std::vector<CMatrix> jumps;
};

RestrictedJumps restricted_jumps(int n_qubits);

// Per-sequence goodness of fit: deviance 2 sum n ln(n / (N p)) over times
// and outcomes, divided by its degrees of freedom.
struct SequenceDeviance {
  PrepLabel prep;
  BasisLabel basis;
  double deviance = 0.0;
  int dof = 0;
  double reduced() const { return dof > 0 ? deviance / dof : 0.0; }
};

struct LindbladEstimate {
  LindbladModel model = LindbladModel::zero(2);
  JumpDecomposition jumps;
  double loglike = 0.0;
  LindbladMode mode = LindbladMode::free;
  FitReport report;
  // Restricted mode: fitted rate per restricted jump, in names order.
  std::vector<double> restricted_rates;
  std::vector<SequenceDeviance> deviance;
  double mean_reduced_deviance = 0.0;
};

// Restricted-form start from exponential pre-fits of the population decay
// (prep 1, z basis) and the Ramsey signal (prep +, x and y bases); the
// two-qubit start adds the ZZ shift read off the neighbor-conditioned
// Ramsey frequencies.
LindbladModel lindblad_start(const Dataset& data);

double loglike_lt(const LindbladModel& model, const SpamEstimate& spam, const Dataset& data);

LindbladEstimate fit_lindblad(const Dataset& data, const SpamEstimate& spam, LindbladMode mode,
                              const OptimizerConfig& config = {});

std::vector<SequenceDeviance> sequence_deviance(const LindbladModel& model, const SpamEstimate& spam,
                                                const Dataset& data);

// Diamond distance between the channels exp(L_a t) and exp(L_b t).
double deviation_delta(const LindbladModel& a, const LindbladModel& b, double t_us);

// Unique stationary state; ModelError when the null space of the
// Liouvillian is degenerate.
DensityMatrix steady_state(const LindbladModel& model);

// Internal pieces exposed for gradient checks.
namespace lindblad_detail {

// Objective over the packed parameters of a mode, with analytic gradient.
struct Problem;
std::shared_ptr<Problem> make_problem(const Dataset& data, const SpamEstimate& spam,
                                      LindbladMode mode);
Eigen::Index parameter_count(const Problem& p);
double evaluate(const Problem& p, const RVector& x, RVector* grad);
LindbladModel decode(const Problem& p, const RVector& x);
RVector encode(const Problem& p, const LindbladModel& model);

}  // namespace lindblad_detail

}  // namespace lindtomo
