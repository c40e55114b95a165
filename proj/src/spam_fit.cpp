#include "lindtomo/spam_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lindtomo/error.hpp"

namespace lindtomo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kStartMixing = 0.02;

std::span<const double> block_span(const RVector& x, const ParamBlock& b) {
  return {x.data() + b.offset, static_cast<std::size_t>(b.size())};
}

std::span<double> block_span(RVector& x, const ParamBlock& b) {
  return {x.data() + b.offset, static_cast<std::size_t>(b.size())};
}

// Gradient of l(A A^dagger / Tr) wrt A given the gradient Y wrt the state.
CMatrix normalized_state_gradient(const CMatrix& a, const CMatrix& rho, double tau,
                                  const CMatrix& y) {
  const double mean = (y * rho).trace().real();
  return 2.0 * (y - mean * CMatrix::Identity(y.rows(), y.cols())) * a / tau;
}

CMatrix mixed(const CMatrix& m, double eps) {
  const auto d = m.rows();
  return (1.0 - eps) * m + eps * m.trace().real() / static_cast<double>(d) *
                               CMatrix::Identity(d, d);
}

double log_det(const CMatrix& m) {
  Eigen::LLT<CMatrix> llt(m);
  if (llt.info() != Eigen::Success) return kNegInf;
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double v = llt.matrixLLT()(i, i).real();
    if (!(v > 0.0)) return kNegInf;
    s += 2.0 * std::log(v);
  }
  return s;
}

}  // namespace

Dataset zero_delay_slice(const Dataset& data) {
  Dataset out;
  out.n_qubits = data.n_qubits;
  out.times_us = {0.0};
  out.shots_nominal = data.shots_nominal;
  for (const auto& r : data.records) {
    if (r.time_us == 0.0) out.records.push_back(r);
  }
  if (out.records.empty()) throw SchemaError("dataset has no zero-delay records");
  return out;
}

double loglike_spam(const DensityMatrix& rho0, const Povm& povm, const Dataset& slice) {
  if (slice.records.empty()) throw SchemaError("loglike_spam: empty slice");
  for (const auto& r : slice.records) {
    if (r.time_us != 0.0) throw SchemaError("loglike_spam: record with nonzero time");
  }
  Dataset zero = slice;
  zero.times_us = {0.0};
  const ShotTable table = ShotTable::from(zero);
  if (rho0.dim() != table.dim) throw DimensionError("loglike_spam: state dimension mismatch");
  const EffectTable effects(povm, table.n_qubits);
  const RMatrix states = flatten_all(prepared_states(rho0.matrix(), table.n_qubits));
  return slice_loglike(effects, states, table.slices.front().counts, nullptr);
}

namespace {

// rho0 = A A^dagger / Tr, M_o = T B_o T with B_o = A_o A_o^dagger and
// T = (sum B_o)^{-1/2}: every point of the parameter space is physical.
struct SpamParameterization {
  int n_qubits;
  Eigen::Index dim;
  ParamSpace space;
  std::size_t rho_block = 0;
  std::vector<std::size_t> povm_blocks;
  std::vector<CMatrix> prep_rot;
  std::vector<CMatrix> basis_rot;

  explicit SpamParameterization(int n) : n_qubits(n), dim(Eigen::Index{1} << n) {
    rho_block = space.add("rho0", BlockKind::psd_cholesky, dim);
    for (int o = 0; o < count_outcomes(n); ++o) {
      povm_blocks.push_back(space.add("M" + outcome_label(o, n), BlockKind::psd_cholesky, dim));
    }
    for (int s = 0; s < count_preps(n); ++s) prep_rot.push_back(PrepLabel::from_index(s, n).rotation());
    for (int b = 0; b < count_bases(n); ++b) {
      basis_rot.push_back(BasisLabel::from_index(b, n).rotation());
    }
  }

  RVector encode(const CMatrix& rho0, const std::vector<CMatrix>& povm) const {
    RVector x = RVector::Zero(space.size());
    space.pack(rho_block, rho0, x);
    for (std::size_t o = 0; o < povm.size(); ++o) space.pack(povm_blocks[o], povm[o], x);
    return x;
  }

  struct Point {
    CMatrix a;
    CMatrix rho;
    double tau = 0.0;
    std::vector<CMatrix> factors;
    std::vector<CMatrix> b;
    HermitianEigen s_eig;
    CMatrix t;
    std::vector<CMatrix> povm;
  };

  bool decode(const RVector& x, Point& p) const {
    p.a = cholesky_factor(dim, block_span(x, space.block(rho_block)));
    const CMatrix aa = p.a * p.a.adjoint();
    p.tau = aa.trace().real();
    if (!(p.tau > 1e-300)) return false;
    p.rho = aa / p.tau;
    CMatrix s = CMatrix::Zero(dim, dim);
    p.factors.clear();
    p.b.clear();
    for (std::size_t blk : povm_blocks) {
      p.factors.push_back(cholesky_factor(dim, block_span(x, space.block(blk))));
      p.b.push_back(p.factors.back() * p.factors.back().adjoint());
      s += p.b.back();
    }
    p.s_eig = hermitian_eigen(s);
    if (!(p.s_eig.values.minCoeff() > 1e-14 * std::max(1.0, p.s_eig.values.maxCoeff()))) {
      return false;
    }
    p.t = inverse_sqrt(p.s_eig);
    p.povm.clear();
    for (const auto& b : p.b) p.povm.push_back(hermitian_part(p.t * b * p.t));
    return true;
  }

  double evaluate(const RVector& x, const RMatrix& counts, RVector* grad) const {
    Point p;
    if (!decode(x, p)) return kNegInf;
    const EffectTable effects(Povm::trusted(p.povm), n_qubits);
    std::vector<CMatrix> states;
    for (const auto& r : prep_rot) states.push_back(r * p.rho * r.adjoint());
    const RMatrix flat = flatten_all(states);
    RMatrix ratio;
    const double ll = slice_loglike(effects, flat, counts, grad ? &ratio : nullptr);
    if (!grad || !std::isfinite(ll)) return ll;
    grad->setZero(space.size());

    const RMatrix ys = state_gradients(effects, ratio);
    CMatrix y0 = CMatrix::Zero(dim, dim);
    for (std::size_t s = 0; s < prep_rot.size(); ++s) {
      const CMatrix ys_m = unflatten_hermitian(ys.col(static_cast<Eigen::Index>(s)).data(), dim);
      y0 += prep_rot[s].adjoint() * ys_m * prep_rot[s];
    }
    pack_cholesky_gradient(normalized_state_gradient(p.a, p.rho, p.tau, y0),
                           block_span(*grad, space.block(rho_block)));

    const RMatrix zs = effect_gradients(flat, ratio);
    const auto n_out = static_cast<Eigen::Index>(povm_blocks.size());
    std::vector<CMatrix> z(povm_blocks.size(), CMatrix::Zero(dim, dim));
    for (std::size_t b = 0; b < basis_rot.size(); ++b) {
      for (Eigen::Index o = 0; o < n_out; ++o) {
        const CMatrix zm =
            unflatten_hermitian(zs.col(static_cast<Eigen::Index>(b) * n_out + o).data(), dim);
        z[static_cast<std::size_t>(o)] += basis_rot[b] * zm * basis_rot[b].adjoint();
      }
    }
    CMatrix w = CMatrix::Zero(dim, dim);
    for (std::size_t o = 0; o < z.size(); ++o) {
      const CMatrix ztb = z[o] * p.t * p.b[o];
      w += ztb + ztb.adjoint();
    }
    const CMatrix fw = inverse_sqrt_frechet(p.s_eig, w);
    for (std::size_t o = 0; o < z.size(); ++o) {
      const CMatrix g = 2.0 * (p.t * z[o] * p.t + fw) * p.factors[o];
      pack_cholesky_gradient(g, block_span(*grad, space.block(povm_blocks[o])));
    }
    return ll;
  }
};

}  // namespace

SpamTruth spam_start(int n_qubits) {
  const SpamTruth ideal = ideal_spam(n_qubits);
  std::vector<CMatrix> povm;
  for (const auto& m : ideal.povm.elements()) povm.push_back(mixed(m, kStartMixing));
  return {DensityMatrix::trusted(mixed(ideal.rho0.matrix(), kStartMixing)), Povm::trusted(povm)};
}

SpamEstimate fit_spam(const Dataset& data, const OptimizerConfig& config) {
  const Dataset slice = zero_delay_slice(data);
  const ShotTable table = ShotTable::from(slice);
  const int n = table.n_qubits;
  int preps = 0;
  for (bool used : table.preps_used()) preps += used ? 1 : 0;
  const int needed = n == 1 ? 4 : 16;
  if (preps < needed) {
    throw SchemaError("fit_spam: " + std::to_string(preps) + " distinct preparations at t = 0, need " +
                      std::to_string(needed));
  }
  const SpamParameterization param(n);
  const RMatrix& counts = table.slices.front().counts;

  const SpamTruth start = spam_start(n);
  const RVector base = param.encode(start.rho0.matrix(), start.povm.elements());

  const Objective f = [&](const RVector& x, RVector* grad) {
    return param.evaluate(x, counts, grad);
  };
  const FitReport report =
      maximize(f, perturbed_starts(base, std::max(1, config.n_starts), config.seed), config);

  SpamParameterization::Point p;
  param.decode(report.params, p);
  CMatrix rho = p.rho;
  std::vector<CMatrix> povm = p.povm;
  fix_spam_gauge(rho, povm);
  SpamEstimate est{DensityMatrix::trusted(hermitian_part(rho / rho.trace().real())),
                   Povm::trusted(povm), 0.0, report};
  est.loglike = loglike_spam(est.rho0, est.povm, slice);
  return est;
}

void fix_spam_gauge(CMatrix& rho0, std::vector<CMatrix>& povm) {
  const auto d = rho0.rows();
  const int n = qubits_for_dim(d);
  const HermitianBasis basis = hermitian_basis(d);
  const double dn = static_cast<double>(d);
  const CMatrix id = CMatrix::Identity(d, d);
  // Keep u = 1 strictly feasible.
  rho0 = mixed(rho0, 1e-6);
  for (auto& m : povm) m = (1.0 - 1e-6) * m + 1e-6 / dn * id;

  // Components per sector, keyed by the support mask of the Pauli labels.
  const int n_sectors = (1 << n) - 1;
  std::vector<CMatrix> rho_s(static_cast<std::size_t>(n_sectors), CMatrix::Zero(d, d));
  std::vector<std::vector<CMatrix>> m_s(povm.size(), rho_s);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    int mask = 0;
    for (int q = 0; q < n; ++q) {
      if (basis.labels[k][static_cast<std::size_t>(q)] != 'I') mask |= 1 << q;
    }
    const CMatrix& s = basis.operators[k];
    const auto idx = static_cast<std::size_t>(mask - 1);
    rho_s[idx] += ((s * rho0).trace().real() / dn) * s;
    for (std::size_t o = 0; o < povm.size(); ++o) {
      m_s[o][idx] += ((s * povm[o]).trace().real() / dn) * s;
    }
  }
  const CMatrix rho_id = (rho0.trace() / dn) * id;
  std::vector<CMatrix> m_id;
  for (const auto& m : povm) m_id.push_back((m.trace() / dn) * id);

  // Sectors without POVM weight carry no contrast to maximize.
  std::vector<std::size_t> active;
  for (std::size_t sct = 0; sct < rho_s.size(); ++sct) {
    double w = 0.0;
    for (const auto& ms : m_s) w = std::max(w, max_abs(ms[sct]));
    if (w > 1e-12 && max_abs(rho_s[sct]) > 1e-12) active.push_back(sct);
  }
  if (active.empty()) return;

  auto build = [&](const RVector& w, CMatrix& rho, std::vector<CMatrix>& ms) {
    rho = rho_id;
    ms = m_id;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double u = std::exp(w(static_cast<Eigen::Index>(k)));
      rho += rho_s[active[k]] / u;
      for (std::size_t o = 0; o < ms.size(); ++o) ms[o] += u * m_s[o][active[k]];
    }
    for (std::size_t sct = 0; sct < rho_s.size(); ++sct) {
      if (std::find(active.begin(), active.end(), sct) != active.end()) continue;
      rho += rho_s[sct];
      for (std::size_t o = 0; o < ms.size(); ++o) ms[o] += m_s[o][sct];
    }
  };

  // Log-barrier path: maximize sum log u + mu (sum_o log det M_o + log det rho).
  RVector w = RVector::Zero(static_cast<Eigen::Index>(active.size()));
  OptimizerConfig cfg;
  cfg.gtol = 1e-9;
  cfg.ftol = 1e-14;
  cfg.max_iters = 500;
  for (double mu = 1e-2; mu >= 1e-9; mu *= 0.1) {
    const Objective barrier = [&](const RVector& x, RVector* grad) {
      CMatrix rho;
      std::vector<CMatrix> ms;
      build(x, rho, ms);
      double v = x.sum();
      double ld = log_det(rho);
      std::vector<double> lds;
      for (const auto& m : ms) {
        lds.push_back(log_det(m));
        ld += lds.back();
      }
      if (!std::isfinite(ld)) return kNegInf;
      v += mu * ld;
      if (grad) {
        grad->setOnes(x.size());
        const CMatrix rho_inv = rho.inverse();
        std::vector<CMatrix> m_inv;
        for (const auto& m : ms) m_inv.push_back(m.inverse());
        for (std::size_t k = 0; k < active.size(); ++k) {
          const double u = std::exp(x(static_cast<Eigen::Index>(k)));
          double g = -(rho_inv * rho_s[active[k]]).trace().real() / u;
          for (std::size_t o = 0; o < ms.size(); ++o) {
            g += u * (m_inv[o] * m_s[o][active[k]]).trace().real();
          }
          (*grad)(static_cast<Eigen::Index>(k)) += mu * g;
        }
      }
      return v;
    };
    try {
      w = maximize(barrier, {w}, cfg).params;
    } catch (const OptimizerFailure& e) {
      w = e.report().params;
    }
  }
  std::vector<CMatrix> ms;
  build(w, rho0, ms);
  rho0 = hermitian_part(rho0);
  for (std::size_t o = 0; o < povm.size(); ++o) povm[o] = hermitian_part(ms[o]);
}

Povm product_povm(const Povm& a, const Povm& b) {
  std::vector<CMatrix> out;
  for (const auto& x : a.elements()) {
    for (const auto& y : b.elements()) out.push_back(tensor(x, y));
  }
  return Povm::trusted(std::move(out));
}

double measurement_channel_distance(const Povm& joint, const Povm& product,
                                    const OptimizerConfig& config) {
  if (joint.size() != product.size() || joint.dim() != product.dim()) {
    throw DimensionError("measurement_channel_distance: POVMs differ in shape");
  }
  const auto d = joint.dim();
  std::vector<CMatrix> delta;
  for (std::size_t o = 0; o < joint.size(); ++o) delta.push_back(joint[o] - product[o]);

  // The output states are diagonal, so the distance is half the l1 norm of
  // the probability difference; the gradient below is a subgradient at ties.
  const Objective f = [&](const RVector& x, RVector* grad) {
    const CMatrix a = cholesky_factor(d, std::span<const double>(x.data(), x.size()));
    const CMatrix aa = a * a.adjoint();
    const double tau = aa.trace().real();
    if (!(tau > 1e-300)) return kNegInf;
    const CMatrix rho = aa / tau;
    double v = 0.0;
    CMatrix y = CMatrix::Zero(d, d);
    for (const auto& dm : delta) {
      const double p = outcome_prob(rho, dm);
      v += 0.5 * std::abs(p);
      y += (p >= 0.0 ? 0.5 : -0.5) * dm;
    }
    if (grad) {
      grad->resize(x.size());
      pack_cholesky_gradient(normalized_state_gradient(a, rho, tau, y),
                             std::span<double>(grad->data(), grad->size()));
    }
    return v;
  };

  std::vector<RVector> starts;
  const int n_random = std::max(4, config.n_starts);
  RVector base = RVector::Zero(d * d);
  {
    const CholeskyParam c = cholesky_encode(CMatrix::Identity(d, d));
    for (std::size_t i = 0; i < c.reals.size(); ++i) base(static_cast<Eigen::Index>(i)) = c.reals[i];
  }
  starts = perturbed_starts(base, n_random + 1, config.seed, 1.0, 0.5);
  OptimizerConfig cfg = config;
  cfg.gtol = 1e-9;
  try {
    return maximize(f, starts, cfg).best_loglike;
  } catch (const OptimizerFailure& e) {
    // A kink at the optimum can stall the quasi-Newton iteration; the best
    // point reached is still attained by a state.
    return e.report().best_loglike;
  }
}

ThermalFit thermal_fit(const DensityMatrix& rho0) {
  if (rho0.dim() != 2) throw DimensionError("thermal_fit: single-qubit state required");
  auto dist = [&](double a) {
    return trace_distance(DensityMatrix::thermal(a).matrix(), rho0.matrix());
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = 1.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = dist(x1), f2 = dist(x2);
  while (hi - lo > 1e-4) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = dist(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = dist(x2);
    }
  }
  ThermalFit best{0.5 * (lo + hi), dist(0.5 * (lo + hi))};
  for (double edge : {0.0, 1.0}) {
    if (const double v = dist(edge); v < best.distance) best = {edge, v};
  }
  return best;
}

}  // namespace lindtomo
