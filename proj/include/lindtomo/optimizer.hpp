#pragma once

// Multi-start quasi-Newton maximization over constraint-free
// parameterizations. Every estimator maps its physical objects (states,
// POVMs, Kraus sets, Lindblad matrices) onto a flat real vector described
// by a ParamSpace and hands the log-likelihood to maximize().

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lindtomo/error.hpp"
#include "lindtomo/linalg.hpp"

namespace lindtomo {

enum class BlockKind { psd_cholesky, hermitian, unconstrained_real };

struct ParamBlock {
  std::string name;
  BlockKind kind;
  Eigen::Index dim;      // matrix side, or vector length for unconstrained_real
  Eigen::Index offset;   // first real in the packed vector

  Eigen::Index size() const { return kind == BlockKind::unconstrained_real ? dim : dim * dim; }
};

class ParamSpace {
 public:
  // Returns the block index.
  std::size_t add(std::string name, BlockKind kind, Eigen::Index dim);

  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }
  const ParamBlock& block(std::size_t i) const { return blocks_.at(i); }
  Eigen::Index size() const noexcept { return size_; }

  // psd_cholesky: A A^dagger (unnormalized); hermitian: the matrix itself;
  // unconstrained_real: a dim x 1 real column.
  CMatrix unpack(std::size_t block, const RVector& x) const;
  void pack(std::size_t block, const CMatrix& value, RVector& x) const;

 private:
  std::vector<ParamBlock> blocks_;
  Eigen::Index size_ = 0;
};

// Hermitian matrix from dim^2 reals: diagonal entries first, then (re, im)
// of the strict upper triangle row by row.
CMatrix hermitian_decode(Eigen::Index dim, const double* reals);
void hermitian_encode(const CMatrix& h, double* reals);

struct OptimizerConfig {
  double gtol = 1e-6;
  double ftol = 1e-10;
  int max_iters = 2000;
  int n_starts = 5;
  std::uint64_t seed = 0;
  // Accepted for configuration compatibility. Constraints are built into
  // the parameterizations, so no penalty barrier is ever active.
  double barrier_init = 1.0;
  double barrier_growth = 10.0;
};

struct StartOutcome {
  double loglike = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FitReport {
  double best_loglike = 0.0;
  RVector params;
  int starts_tried = 0;
  int best_start = 0;
  bool converged = false;
  int iterations = 0;
  double wall_time_s = 0.0;
  std::vector<StartOutcome> starts;
};

// Thrown when no start converges; carries the best point reached.
class OptimizerFailure : public OptimizerError {
 public:
  OptimizerFailure(const std::string& what, FitReport report)
      : OptimizerError(what), report_(std::move(report)) {}
  const FitReport& report() const noexcept { return report_; }

 private:
  FitReport report_;
};

// Objective with optional gradient: writes df/dx into *grad when non-null.
using Objective = std::function<double(const RVector& x, RVector* grad)>;
using ValueObjective = std::function<double(const RVector& x)>;

// Central differences, h = 1e-6 (1 + |x_i|).
RVector fd_gradient(const ValueObjective& f, const RVector& x);

// A start where the objective is not finite is skipped with loglike -inf;
// OptimizerError when every start is like that.
FitReport maximize(const Objective& f, const std::vector<RVector>& starts,
                   const OptimizerConfig& config);
// Gradient by central finite differences.
FitReport maximize(const ValueObjective& f, const std::vector<RVector>& starts,
                   const OptimizerConfig& config);

// base followed by n - 1 seeded Gaussian perturbations of it, each
// coordinate moved by scale * (|x_i| + floor) * N(0, 1).
std::vector<RVector> perturbed_starts(const RVector& base, int n, std::uint64_t seed,
                                      double scale = 0.2, double floor = 0.05);

}  // namespace lindtomo
