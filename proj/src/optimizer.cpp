#include "lindtomo/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "lindtomo/parallel.hpp"
#include "lindtomo/quantum.hpp"
#include "lindtomo/rng.hpp"

namespace lindtomo {

std::size_t ParamSpace::add(std::string name, BlockKind kind, Eigen::Index dim) {
  ParamBlock b{std::move(name), kind, dim, size_};
  size_ += b.size();
  blocks_.push_back(std::move(b));
  return blocks_.size() - 1;
}

CMatrix hermitian_decode(Eigen::Index dim, const double* reals) {
  CMatrix h(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) h(i, i) = reals[i];
  Eigen::Index k = dim;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j, k += 2) {
      h(i, j) = cplx(reals[k], reals[k + 1]);
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

void hermitian_encode(const CMatrix& h, double* reals) {
  const auto dim = h.rows();
  for (Eigen::Index i = 0; i < dim; ++i) reals[i] = h(i, i).real();
  Eigen::Index k = dim;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j, k += 2) {
      const cplx v = 0.5 * (h(i, j) + std::conj(h(j, i)));
      reals[k] = v.real();
      reals[k + 1] = v.imag();
    }
  }
}

CMatrix ParamSpace::unpack(std::size_t block, const RVector& x) const {
  const ParamBlock& b = blocks_.at(block);
  const double* p = x.data() + b.offset;
  switch (b.kind) {
    case BlockKind::psd_cholesky:
      return cholesky_decode(b.dim, std::span<const double>(p, static_cast<std::size_t>(b.size())),
                             false);
    case BlockKind::hermitian:
      return hermitian_decode(b.dim, p);
    case BlockKind::unconstrained_real:
      return x.segment(b.offset, b.dim).cast<cplx>();
  }
  return {};
}

void ParamSpace::pack(std::size_t block, const CMatrix& value, RVector& x) const {
  const ParamBlock& b = blocks_.at(block);
  if (x.size() != size_) x.conservativeResize(size_);
  double* p = x.data() + b.offset;
  switch (b.kind) {
    case BlockKind::psd_cholesky: {
      const CholeskyParam c = cholesky_encode(value);
      std::copy(c.reals.begin(), c.reals.end(), p);
      break;
    }
    case BlockKind::hermitian:
      hermitian_encode(value, p);
      break;
    case BlockKind::unconstrained_real:
      for (Eigen::Index i = 0; i < b.dim; ++i) p[i] = value(i, 0).real();
      break;
  }
}

RVector fd_gradient(const ValueObjective& f, const RVector& x) {
  RVector g(x.size());
  RVector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x(i)));
    probe(i) = x(i) + h;
    const double up = f(probe);
    probe(i) = x(i) - h;
    const double down = f(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

namespace {

struct StartResult {
  RVector x;
  StartOutcome outcome;
  std::string invalid;  // non-empty when the start point itself is not finite
};

std::string describe(const RVector& x) {
  std::ostringstream out;
  out.precision(6);
  out << "[";
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(x.size(), 12); ++i) {
    out << (i ? ", " : "") << x(i);
  }
  if (x.size() > 12) out << ", ... (" << x.size() << " values)";
  out << "]";
  return out.str();
}

// BFGS on F = -f with an Armijo backtracking line search.
StartResult ascend(const Objective& f, const RVector& x0, const OptimizerConfig& cfg) {
  const auto n = x0.size();
  StartResult r{x0, {}, {}};
  RVector grad(n);
  double fx = f(r.x, &grad);
  if (!std::isfinite(fx) || !grad.allFinite()) {
    r.outcome.loglike = -std::numeric_limits<double>::infinity();
    r.invalid = "objective not finite at start point " + describe(x0);
    return r;
  }
  RVector g = -grad;
  RMatrix hinv = RMatrix::Identity(n, n);
  bool identity = true;
  int quiet = 0;
  RVector trial_grad(n);
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= cfg.gtol) {
      r.outcome.converged = true;
      break;
    }
    RVector p = -hinv * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      identity = true;
      p = -g;
      slope = g.dot(p);
    }
    // Without curvature information, start with a step moving no coordinate
    // by more than 0.1 and expand it while the objective keeps improving.
    double alpha = identity ? std::min(1.0, 0.1 / p.lpNorm<Eigen::Infinity>()) : 1.0;
    bool accepted = false;
    RVector xt;
    double ft = 0.0;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      xt = r.x + alpha * p;
      ft = f(xt, &trial_grad);
      if (std::isfinite(ft) && trial_grad.allFinite() && -ft <= -fx + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (accepted && identity) {
      RVector grad_more(n);
      for (int grow = 0; grow < 30; ++grow) {
        const RVector xm = r.x + 2.0 * alpha * p;
        const double fm = f(xm, &grad_more);
        if (!(std::isfinite(fm) && grad_more.allFinite() && fm > ft)) break;
        alpha *= 2.0;
        xt = xm;
        ft = fm;
        trial_grad = grad_more;
      }
    }
    if (!accepted) {
      if (!identity) {
        hinv.setIdentity();
        identity = true;
        continue;
      }
      // No decrease along steepest descent at any representable step:
      // stationary to working precision.
      r.outcome.converged = true;
      break;
    }
    const RVector s = xt - r.x;
    const RVector gt = -trial_grad;
    const RVector y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (identity) {
        hinv *= sy / y.squaredNorm();
        identity = false;
      }
      const RVector hy = hinv * y;
      const double rho = 1.0 / sy;
      // H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      hinv += rho * ((1.0 + rho * y.dot(hy)) * (s * s.transpose()) - hy * s.transpose() -
                     s * hy.transpose());
    }
    const double change = std::abs(ft - fx) / std::max(1.0, std::abs(fx));
    r.x = xt;
    fx = ft;
    g = gt;
    quiet = change <= cfg.ftol ? quiet + 1 : 0;
    if (quiet >= 5) {
      r.outcome.converged = true;
      ++it;
      break;
    }
  }
  r.outcome.loglike = fx;
  r.outcome.iterations = it;
  return r;
}

}  // namespace

FitReport maximize(const Objective& f, const std::vector<RVector>& starts,
                   const OptimizerConfig& config) {
  if (starts.empty()) throw OptimizerError("no starting points");
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<StartResult> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t k) { results[k] = ascend(f, starts[k], config); });

  FitReport report;
  report.starts_tried = static_cast<int>(starts.size());
  bool any_converged = false;
  const bool all_invalid = std::all_of(results.begin(), results.end(),
                                       [](const StartResult& r) { return !r.invalid.empty(); });
  if (all_invalid) throw OptimizerError(results.front().invalid);
  for (std::size_t k = 0; k < results.size(); ++k) {
    report.starts.push_back(results[k].outcome);
    any_converged = any_converged || results[k].outcome.converged;
    if (k == 0 || results[k].outcome.loglike > report.best_loglike) {
      report.best_loglike = results[k].outcome.loglike;
      report.best_start = static_cast<int>(k);
    }
  }
  const StartResult& best = results[static_cast<std::size_t>(report.best_start)];
  report.params = best.x;
  report.converged = best.outcome.converged;
  report.iterations = best.outcome.iterations;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!any_converged) {
    throw OptimizerFailure("no start converged within " + std::to_string(config.max_iters) +
                               " iterations; best loglike " + std::to_string(report.best_loglike),
                           report);
  }
  return report;
}

FitReport maximize(const ValueObjective& f, const std::vector<RVector>& starts,
                   const OptimizerConfig& config) {
  const Objective with_fd = [&f](const RVector& x, RVector* grad) {
    if (grad) *grad = fd_gradient(f, x);
    return f(x);
  };
  return maximize(with_fd, starts, config);
}

std::vector<RVector> perturbed_starts(const RVector& base, int n, std::uint64_t seed, double scale,
                                      double floor) {
  std::vector<RVector> out{base};
  for (int k = 1; k < n; ++k) {
    std::normal_distribution<double> normal(0.0, 1.0);
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(k));
    RVector x = base;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x(i) += scale * (std::abs(x(i)) + floor) * normal(rng);
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace lindtomo
