#include "lindtomo/lindblad_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "lindtomo/error.hpp"
#include "lindtomo/likelihood.hpp"
#include "lindtomo/parallel.hpp"
#include "lindtomo/prefit.hpp"

namespace lindtomo {

std::string_view to_string(LindbladMode m) {
  return m == LindbladMode::free ? "free" : "restricted";
}

LindbladMode parse_mode(std::string_view text) {
  if (text == "free") return LindbladMode::free;
  if (text == "restricted") return LindbladMode::restricted;
  throw SchemaError("unknown Lindblad mode '" + std::string(text) + "'");
}

RestrictedJumps restricted_jumps(int n_qubits) {
  RestrictedJumps r;
  if (n_qubits == 1) {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 1) = 1.0;
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1.0 / std::sqrt(2.0);
    d(1, 1) = -1.0 / std::sqrt(2.0);
    r.names = {"a", "d"};
    r.jumps = {a, d};
  } else if (n_qubits == 2) {
    const double s = 1.0 / std::sqrt(2.0);
    CMatrix a1 = CMatrix::Zero(4, 4), a2 = CMatrix::Zero(4, 4);
    a1(0, 1) = a1(2, 3) = s;
    a2(0, 2) = a2(1, 3) = s;
    CMatrix d1 = CMatrix::Zero(4, 4), d2 = CMatrix::Zero(4, 4);
    d1.diagonal() << 0.5, -0.5, 0.5, -0.5;
    d2.diagonal() << 0.5, 0.5, -0.5, -0.5;
    r.names = {"a1", "a2", "d1", "d2"};
    r.jumps = {a1, a2, d1, d2};
  } else {
    throw DimensionError("restricted jumps exist for one or two qubits");
  }
  return r;
}

namespace lindblad_detail {

// Parameters: Pauli coefficients of a traceless H, then either the
// Cholesky factor of the Lindblad matrix (free) or sqrt of each restricted
// rate (restricted).
struct Problem {
  LindbladMode mode;
  int n_qubits;
  Eigen::Index dim;
  HermitianBasis basis;
  std::vector<CMatrix> h_superops;   // superoperator of -i[s_k, .]
  std::vector<CMatrix> d_superops;   // free: D(s_i, s_j) at i * m + j
  RestrictedJumps restricted;
  std::vector<CMatrix> r_superops;   // restricted: D(L_k, L_k)
  ShotTable table;
  std::vector<CMatrix> states;
  std::unique_ptr<EffectTable> effects;

  Eigen::Index n_h() const { return static_cast<Eigen::Index>(basis.size()); }
  Eigen::Index n_l() const {
    return mode == LindbladMode::free ? n_h() * n_h()
                                      : static_cast<Eigen::Index>(restricted.jumps.size());
  }
};

std::shared_ptr<Problem> make_problem(const Dataset& data, const SpamEstimate& spam,
                                      LindbladMode mode) {
  auto p = std::make_shared<Problem>();
  p->mode = mode;
  p->table = ShotTable::from(data);
  p->n_qubits = p->table.n_qubits;
  p->dim = p->table.dim;
  if (spam.rho0.dim() != p->dim) throw DimensionError("fit_lindblad: SPAM dimension mismatch");
  p->basis = hermitian_basis(p->dim);
  for (const auto& s : p->basis.operators) p->h_superops.push_back(hamiltonian_superop(s));
  if (mode == LindbladMode::free) {
    for (const auto& si : p->basis.operators) {
      for (const auto& sj : p->basis.operators) p->d_superops.push_back(dissipator_superop(si, sj));
    }
  } else {
    p->restricted = restricted_jumps(p->n_qubits);
    for (const auto& l : p->restricted.jumps) p->r_superops.push_back(dissipator_superop(l, l));
  }
  p->states = prepared_states(spam.rho0.matrix(), p->n_qubits);
  p->effects = std::make_unique<EffectTable>(spam.povm, p->n_qubits);
  return p;
}

Eigen::Index parameter_count(const Problem& p) { return p.n_h() + p.n_l(); }

namespace {

CMatrix hamiltonian_of(const Problem& p, const RVector& x) {
  CMatrix h = CMatrix::Zero(p.dim, p.dim);
  for (Eigen::Index k = 0; k < p.n_h(); ++k) h += x(k) * p.basis.operators[static_cast<std::size_t>(k)];
  return h;
}

CMatrix free_factor(const Problem& p, const RVector& x) {
  const auto m = p.n_h();
  return cholesky_factor(m, std::span<const double>(x.data() + m, static_cast<std::size_t>(m * m)));
}

CMatrix generator(const Problem& p, const RVector& x) {
  CMatrix gen = CMatrix::Zero(p.dim * p.dim, p.dim * p.dim);
  for (Eigen::Index k = 0; k < p.n_h(); ++k) gen += x(k) * p.h_superops[static_cast<std::size_t>(k)];
  if (p.mode == LindbladMode::free) {
    const CMatrix a = free_factor(p, x);
    const CMatrix l = a * a.adjoint();
    const auto m = p.n_h();
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        gen += l(i, j) * p.d_superops[static_cast<std::size_t>(i * m + j)];
      }
    }
  } else {
    for (std::size_t k = 0; k < p.r_superops.size(); ++k) {
      const double xk = x(p.n_h() + static_cast<Eigen::Index>(k));
      gen += xk * xk * p.r_superops[k];
    }
  }
  return gen;
}

// Re<A, B> = Re Tr(A^dagger B)
double re_inner(const CMatrix& a, const CMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

}  // namespace

double evaluate(const Problem& p, const RVector& x, RVector* grad) {
  const CMatrix gen = generator(p, x);
  const auto& slices = p.table.slices;
  const auto d = p.dim;
  std::vector<double> ll(slices.size(), 0.0);
  std::vector<CMatrix> g_gen(slices.size());
  parallel_for(slices.size(), [&](std::size_t i) {
    const double t = slices[i].time_us;
    const CMatrix s = t == 0.0 ? CMatrix::Identity(d * d, d * d) : expm(gen * t);
    std::vector<CMatrix> evolved;
    for (const auto& rho : p.states) {
      evolved.push_back(apply_superop(s, rho));
      // Far outside the physical range of rates the exponential loses
      // accuracy; a trace drift exposes it.
      if (!(std::abs(evolved.back().trace() - 1.0) <= 1e-6)) {
        ll[i] = -std::numeric_limits<double>::infinity();
        return;
      }
    }
    const RMatrix flat = flatten_all(evolved);
    RMatrix ratio;
    ll[i] = slice_loglike(*p.effects, flat, slices[i].counts, grad ? &ratio : nullptr);
    if (!grad || t == 0.0 || !std::isfinite(ll[i])) return;
    const RMatrix ys = state_gradients(*p.effects, ratio);
    CMatrix gs = CMatrix::Zero(d * d, d * d);
    for (std::size_t k = 0; k < p.states.size(); ++k) {
      if (slices[i].counts.col(static_cast<Eigen::Index>(k)).sum() == 0.0) continue;
      const CMatrix y = unflatten_hermitian(ys.col(static_cast<Eigen::Index>(k)).data(), d);
      gs += vec(y) * vec(p.states[k]).adjoint();
    }
    g_gen[i] = t * expm_frechet_adjoint(gen * t, gs);
  });
  double total = 0.0;
  for (double v : ll) total += v;
  if (!std::isfinite(total)) return -std::numeric_limits<double>::infinity();
  if (!grad) return total;

  CMatrix g = CMatrix::Zero(d * d, d * d);
  for (std::size_t i = 0; i < slices.size(); ++i) {
    if (g_gen[i].size() > 0) g += g_gen[i];
  }
  grad->setZero(parameter_count(p));
  for (Eigen::Index k = 0; k < p.n_h(); ++k) {
    (*grad)(k) = re_inner(g, p.h_superops[static_cast<std::size_t>(k)]);
  }
  if (p.mode == LindbladMode::free) {
    const auto m = p.n_h();
    CMatrix gamma(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        gamma(i, j) =
            (p.d_superops[static_cast<std::size_t>(i * m + j)].conjugate().cwiseProduct(g)).sum();
      }
    }
    const CMatrix a = free_factor(p, x);
    const CMatrix ga = (gamma + gamma.adjoint()) * a;
    pack_cholesky_gradient(ga, std::span<double>(grad->data() + m, static_cast<std::size_t>(m * m)));
  } else {
    for (std::size_t k = 0; k < p.r_superops.size(); ++k) {
      const auto idx = p.n_h() + static_cast<Eigen::Index>(k);
      (*grad)(idx) = 2.0 * x(idx) * re_inner(g, p.r_superops[k]);
    }
  }
  return total;
}

LindbladModel decode(const Problem& p, const RVector& x) {
  const CMatrix h = hamiltonian_of(p, x);
  if (p.mode == LindbladMode::free) {
    const CMatrix a = free_factor(p, x);
    return LindbladModel::trusted(h, hermitian_part(a * a.adjoint()));
  }
  JumpDecomposition j;
  for (std::size_t k = 0; k < p.restricted.jumps.size(); ++k) {
    const double xk = x(p.n_h() + static_cast<Eigen::Index>(k));
    j.rates.push_back(xk * xk);
    j.jump_ops.push_back(p.restricted.jumps[k]);
  }
  return lindblad_from_jumps(h, j);
}

RVector encode(const Problem& p, const LindbladModel& model) {
  RVector x = RVector::Zero(parameter_count(p));
  const double dn = static_cast<double>(p.dim);
  for (Eigen::Index k = 0; k < p.n_h(); ++k) {
    x(k) = (p.basis.operators[static_cast<std::size_t>(k)] * model.hamiltonian()).trace().real() / dn;
  }
  const CMatrix& l = model.lindblad_matrix();
  if (p.mode == LindbladMode::free) {
    const CholeskyParam c = cholesky_encode(l);
    for (std::size_t i = 0; i < c.reals.size(); ++i) x(p.n_h() + static_cast<Eigen::Index>(i)) = c.reals[i];
  } else {
    // Restricted jumps are traceless and mutually orthogonal, so the rate
    // is the Lindblad matrix projected on the jump's coefficient vector.
    for (std::size_t k = 0; k < p.restricted.jumps.size(); ++k) {
      CVector a(p.n_h());
      for (Eigen::Index i = 0; i < p.n_h(); ++i) {
        a(i) = (p.basis.operators[static_cast<std::size_t>(i)] * p.restricted.jumps[k]).trace() / dn;
      }
      const double n2 = a.squaredNorm();
      const double rate = std::max(0.0, (a.adjoint() * l * a)(0, 0).real() / (n2 * n2));
      x(p.n_h() + static_cast<Eigen::Index>(k)) = std::sqrt(rate);
    }
  }
  return x;
}

}  // namespace lindblad_detail

namespace {

using lindblad_detail::Problem;

CMatrix pauli_z_on(int qubit, int n_qubits) {
  CMatrix z = CMatrix::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  const CMatrix id = CMatrix::Identity(2, 2);
  if (n_qubits == 1) return z;
  return qubit == 0 ? tensor(z, id) : tensor(id, z);
}

}  // namespace

LindbladModel lindblad_start(const Dataset& data) {
  constexpr double kRateFloor = 1e-3;
  const int n = data.n_qubits;
  const auto pre = per_qubit_prefit(data);
  const RestrictedJumps rj = restricted_jumps(n);
  JumpDecomposition j;
  j.jump_ops = rj.jumps;
  CMatrix h;
  if (n == 1) {
    h = 0.5 * pre[0].detuning * pauli_z_on(0, 1);
    j.rates = {std::max(pre[0].gamma1, kRateFloor),
               std::max(pre[0].gamma2 - 0.5 * pre[0].gamma1, kRateFloor)};
  } else {
    const double zz = zz_prefit(data);
    const CMatrix za = pauli_z_on(0, 2), zb = pauli_z_on(1, 2);
    // Precession with the partner in |0> includes half the ZZ shift.
    h = 0.5 * (pre[0].detuning - 0.5 * zz) * za + 0.5 * (pre[1].detuning - 0.5 * zz) * zb +
        0.25 * zz * za * zb;
    // Order a1 (B), a2 (A), d1 (B), d2 (A). The two-qubit jumps carry a
    // 1/sqrt 2 (damping) and 1/2 (dephasing) factor per qubit.
    j.rates = {std::max(2.0 * pre[1].gamma1, kRateFloor), std::max(2.0 * pre[0].gamma1, kRateFloor),
               std::max(2.0 * (pre[1].gamma2 - 0.5 * pre[1].gamma1), kRateFloor),
               std::max(2.0 * (pre[0].gamma2 - 0.5 * pre[0].gamma1), kRateFloor)};
  }
  return lindblad_from_jumps(h, j);
}

namespace {

LindbladEstimate finish(const Problem& p, const FitReport& report, const SpamEstimate& spam,
                        const Dataset& data) {
  LindbladEstimate est;
  est.mode = p.mode;
  est.report = report;
  est.model = lindblad_detail::decode(p, report.params);
  est.jumps = jumps_from_lindblad(est.model);
  est.loglike = lindblad_detail::evaluate(p, report.params, nullptr);
  if (p.mode == LindbladMode::restricted) {
    for (std::size_t k = 0; k < p.restricted.jumps.size(); ++k) {
      const double xk = report.params(p.n_h() + static_cast<Eigen::Index>(k));
      est.restricted_rates.push_back(xk * xk);
    }
  }
  est.deviance = sequence_deviance(est.model, spam, data);
  double sum = 0.0;
  for (const auto& s : est.deviance) sum += s.reduced();
  est.mean_reduced_deviance = est.deviance.empty() ? 0.0 : sum / static_cast<double>(est.deviance.size());
  return est;
}

}  // namespace

double loglike_lt(const LindbladModel& model, const SpamEstimate& spam, const Dataset& data) {
  if (data.records.empty()) throw SchemaError("loglike_lt: empty dataset");
  const ShotTable table = ShotTable::from(data);
  if (model.dim() != table.dim || spam.rho0.dim() != table.dim) {
    throw DimensionError("loglike_lt: dimension mismatch");
  }
  const CMatrix gen = liouvillian(model);
  const EffectTable effects(spam.povm, table.n_qubits);
  const auto states = prepared_states(spam.rho0.matrix(), table.n_qubits);
  std::vector<double> ll(table.slices.size());
  parallel_for(table.slices.size(), [&](std::size_t i) {
    const CMatrix s = expm(gen * table.slices[i].time_us);
    std::vector<CMatrix> evolved;
    for (const auto& rho : states) evolved.push_back(apply_superop(s, rho));
    ll[i] = slice_loglike(effects, flatten_all(evolved), table.slices[i].counts, nullptr);
  });
  double total = 0.0;
  for (double v : ll) total += v;
  return total;
}

LindbladEstimate fit_lindblad(const Dataset& data, const SpamEstimate& spam, LindbladMode mode,
                              const OptimizerConfig& config) {
  const int n_starts = std::max(1, config.n_starts);
  const auto restricted = lindblad_detail::make_problem(data, spam, LindbladMode::restricted);
  const Objective f_r = [&](const RVector& x, RVector* g) {
    return lindblad_detail::evaluate(*restricted, x, g);
  };
  const RVector base_r = lindblad_detail::encode(*restricted, lindblad_start(data));
  const FitReport rep_r = maximize(f_r, perturbed_starts(base_r, n_starts, config.seed), config);
  if (mode == LindbladMode::restricted) return finish(*restricted, rep_r, spam, data);

  // The free model contains the restricted optimum, which seeds the search
  // so the free likelihood can never end below it.
  const auto free = lindblad_detail::make_problem(data, spam, LindbladMode::free);
  const LindbladModel best_r = lindblad_detail::decode(*restricted, rep_r.params);
  const auto m = static_cast<Eigen::Index>(free->basis.size());
  // A restricted optimum can sit in a degenerate basin when the data carries
  // dissipation outside the restricted family, so the pre-fit model seeds
  // the free search as well.
  const auto widen = [m](const LindbladModel& model) {
    const double mean_rate =
        std::max(1e-3, model.lindblad_matrix().trace().real() / static_cast<double>(m));
    return LindbladModel::trusted(model.hamiltonian(),
                                  model.lindblad_matrix() + 0.05 * mean_rate * CMatrix::Identity(m, m));
  };
  std::vector<RVector> starts{lindblad_detail::encode(*free, best_r)};
  const int n_pre = std::max(1, (n_starts - 1 + 1) / 2);
  for (const auto& s : perturbed_starts(lindblad_detail::encode(*free, widen(lindblad_start(data))),
                                        n_pre, config.seed + 2, 0.1, 0.01)) {
    starts.push_back(s);
  }
  for (const auto& s : perturbed_starts(lindblad_detail::encode(*free, widen(best_r)),
                                        std::max(1, n_starts - 1 - n_pre), config.seed + 1, 0.1, 0.01)) {
    starts.push_back(s);
  }
  const Objective f = [&](const RVector& x, RVector* g) {
    return lindblad_detail::evaluate(*free, x, g);
  };
  return finish(*free, maximize(f, starts, config), spam, data);
}

std::vector<SequenceDeviance> sequence_deviance(const LindbladModel& model, const SpamEstimate& spam,
                                                const Dataset& data) {
  const int n = data.n_qubits;
  const CMatrix gen = liouvillian(model);
  const auto n_out = count_outcomes(n);
  std::vector<SequenceDeviance> out;
  for (const auto& [prep, basis] : enumerate_sequences(n)) out.push_back({prep, basis, 0.0, 0});
  const auto n_basis = static_cast<std::size_t>(count_bases(n));
  std::vector<CMatrix> props;
  for (double t : data.times_us) props.push_back(expm(gen * t));
  for (const auto& r : data.records) {
    const auto ti = static_cast<std::size_t>(
        std::find(data.times_us.begin(), data.times_us.end(), r.time_us) - data.times_us.begin());
    if (ti >= props.size()) throw SchemaError("record time not listed in times_us");
    const CMatrix rho = ideal_prep_state(r.prep, spam.rho0).matrix();
    const auto probs = outcome_probabilities(apply_superop(props[ti], rho), r.basis, spam.povm);
    double g = 0.0;
    for (int o = 0; o < n_out; ++o) {
      const double k = static_cast<double>(r.counts[static_cast<std::size_t>(o)]);
      if (k == 0.0) continue;
      const double expect = static_cast<double>(r.shots) * std::max(probs[static_cast<std::size_t>(o)], kProbFloor);
      g += 2.0 * k * std::log(k / expect);
    }
    auto& s = out[static_cast<std::size_t>(r.prep.index()) * n_basis +
                  static_cast<std::size_t>(r.basis.index())];
    s.deviance += g;
    s.dof += n_out - 1;
  }
  std::erase_if(out, [](const SequenceDeviance& s) { return s.dof == 0; });
  return out;
}

double deviation_delta(const LindbladModel& a, const LindbladModel& b, double t_us) {
  if (a.dim() != b.dim()) throw DimensionError("deviation_delta: dimension mismatch");
  return diamond_distance(choi_of(liouvillian(a), t_us), choi_of(liouvillian(b), t_us));
}

DensityMatrix steady_state(const LindbladModel& model) {
  const CMatrix gen = liouvillian(model);
  const auto d = model.dim();
  Eigen::JacobiSVD<CMatrix> svd(gen, Eigen::ComputeFullV);
  const RVector sv = svd.singularValues();  // descending
  const double tol = 1e-8 * std::max(1.0, sv(0));
  int null_dim = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) null_dim += sv(i) <= tol ? 1 : 0;
  if (null_dim > 1) {
    throw ModelError("steady state is not unique: null space of dimension " +
                     std::to_string(null_dim));
  }
  const CVector v = svd.matrixV().col(sv.size() - 1);
  CMatrix rho = unvec(v, d);
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-12) throw ModelError("stationary vector has zero trace");
  rho = hermitian_part(rho / tr);
  const double residual = (gen * vec(rho)).norm();
  if (residual > 1e-8 * std::max(1.0, sv(0))) {
    throw ModelError("stationary state residual " + std::to_string(residual));
  }
  return DensityMatrix::trusted(rho);
}

}  // namespace lindtomo
