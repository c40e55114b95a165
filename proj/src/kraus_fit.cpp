#include "lindtomo/kraus_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lindtomo/error.hpp"
#include "lindtomo/likelihood.hpp"
#include "lindtomo/parallel.hpp"
#include "lindtomo/prefit.hpp"

namespace lindtomo {

bool KrausEstimate::ok() const {
  return std::all_of(fits.begin(), fits.end(), [](const KrausFitTime& f) { return f.ok; });
}

std::vector<KrausSet> KrausEstimate::channels() const {
  std::vector<KrausSet> out;
  for (const auto& f : fits) out.push_back(f.kraus);
  return out;
}

namespace {

const ShotSlice& slice_at(const ShotTable& table, double t_us) {
  for (const auto& s : table.slices) {
    if (s.time_us == t_us) return s;
  }
  throw SchemaError("no records at time " + std::to_string(t_us));
}

// K_j = B_j T with T = (sum B^dag B)^{-1/2}; B_j stored as (re, im) pairs in
// column-major order, one dim x dim block per operator.
struct KrausParameterization {
  Eigen::Index dim;
  int n_ops;

  Eigen::Index size() const { return 2 * n_ops * dim * dim; }

  std::vector<CMatrix> raw(const RVector& x) const {
    std::vector<CMatrix> b;
    const auto block = dim * dim;
    for (int j = 0; j < n_ops; ++j) {
      CMatrix m(dim, dim);
      for (Eigen::Index i = 0; i < block; ++i) {
        const auto k = 2 * (j * block + i);
        m.data()[i] = cplx(x(k), x(k + 1));
      }
      b.push_back(std::move(m));
    }
    return b;
  }

  RVector encode(const std::vector<CMatrix>& ops) const {
    RVector x(size());
    const auto block = dim * dim;
    for (int j = 0; j < n_ops; ++j) {
      for (Eigen::Index i = 0; i < block; ++i) {
        const auto k = 2 * (j * block + i);
        x(k) = ops[static_cast<std::size_t>(j)].data()[i].real();
        x(k + 1) = ops[static_cast<std::size_t>(j)].data()[i].imag();
      }
    }
    return x;
  }

  void pack_gradient(const std::vector<CMatrix>& g, RVector& out) const {
    out = encode(g);
  }
};

struct KrausObjective {
  const KrausParameterization& param;
  const EffectTable& effects;
  const std::vector<CMatrix>& states;
  const RMatrix& counts;

  double operator()(const RVector& x, RVector* grad) const {
    const auto d = param.dim;
    const std::vector<CMatrix> b = param.raw(x);
    CMatrix s = CMatrix::Zero(d, d);
    for (const auto& m : b) s += m.adjoint() * m;
    const HermitianEigen eig = hermitian_eigen(s);
    if (!(eig.values.minCoeff() > 1e-14 * std::max(1.0, eig.values.maxCoeff()))) {
      return -std::numeric_limits<double>::infinity();
    }
    const CMatrix t = inverse_sqrt(eig);
    std::vector<CMatrix> k;
    for (const auto& m : b) k.push_back(m * t);

    std::vector<CMatrix> out;
    for (const auto& rho : states) {
      CMatrix r = CMatrix::Zero(d, d);
      for (const auto& kj : k) r += kj * rho * kj.adjoint();
      out.push_back(r);
    }
    const RMatrix flat = flatten_all(out);
    RMatrix ratio;
    const double ll = slice_loglike(effects, flat, counts, grad ? &ratio : nullptr);
    if (!grad || !std::isfinite(ll)) return ll;

    const RMatrix ys = state_gradients(effects, ratio);
    std::vector<CMatrix> gk(k.size(), CMatrix::Zero(d, d));
    for (std::size_t s_i = 0; s_i < states.size(); ++s_i) {
      if (counts.col(static_cast<Eigen::Index>(s_i)).sum() == 0.0) continue;
      const CMatrix y = unflatten_hermitian(ys.col(static_cast<Eigen::Index>(s_i)).data(), d);
      for (std::size_t j = 0; j < k.size(); ++j) gk[j] += 2.0 * y * k[j] * states[s_i];
    }
    CMatrix q = CMatrix::Zero(d, d);
    for (std::size_t j = 0; j < k.size(); ++j) q += b[j].adjoint() * gk[j];
    const CMatrix p = inverse_sqrt_frechet(eig, hermitian_part(q));
    std::vector<CMatrix> gb;
    for (std::size_t j = 0; j < k.size(); ++j) gb.push_back(gk[j] * t + 2.0 * b[j] * p);
    param.pack_gradient(gb, *grad);
    return ll;
  }
};

std::vector<CMatrix> normalized(std::vector<CMatrix> ops) {
  const auto d = ops.front().rows();
  CMatrix s = CMatrix::Zero(d, d);
  for (const auto& k : ops) s += k.adjoint() * k;
  const CMatrix t = inverse_sqrt(hermitian_eigen(s));
  for (auto& k : ops) k = k * t;
  return ops;
}

}  // namespace

double loglike_kraus(const KrausSet& k, const SpamEstimate& spam, const Dataset& data,
                     double t_us) {
  const ShotTable table = ShotTable::from(data);
  if (k.dim != table.dim || spam.rho0.dim() != table.dim) {
    throw DimensionError("loglike_kraus: dimension mismatch");
  }
  const ShotSlice& slice = slice_at(table, t_us);
  const EffectTable effects(spam.povm, table.n_qubits);
  std::vector<CMatrix> out;
  for (const auto& rho : prepared_states(spam.rho0.matrix(), table.n_qubits)) {
    out.push_back(kraus_apply(k, rho));
  }
  return slice_loglike(effects, flatten_all(out), slice.counts, nullptr);
}

std::vector<CMatrix> kraus_start(const Dataset& data, double t_us) {
  const auto prefit = per_qubit_prefit(data);
  std::vector<CMatrix> ops = decay_kraus(prefit[0], t_us);
  if (data.n_qubits == 2) {
    const auto b_ops = decay_kraus(prefit[1], t_us);
    std::vector<CMatrix> joint;
    for (const auto& a : ops) {
      for (const auto& b : b_ops) joint.push_back(tensor(a, b));
    }
    ops = std::move(joint);
  }
  // Zero operators sit on a saddle of the likelihood; give each a small,
  // distinct direction.
  const HermitianBasis basis = hermitian_basis(ops.front().rows());
  std::size_t next = 0;
  for (auto& k : ops) {
    if (max_abs(k) < 1e-6) k = 1e-3 * basis.operators[next++ % basis.size()];
  }
  return normalized(std::move(ops));
}

KrausEstimate fit_kraus(const Dataset& data, const SpamEstimate& spam,
                        const OptimizerConfig& config, const KrausFitOptions& options) {
  const ShotTable table = ShotTable::from(data);
  if (spam.rho0.dim() != table.dim) throw DimensionError("fit_kraus: SPAM dimension mismatch");
  const auto d = table.dim;
  const KrausParameterization param{d, static_cast<int>(d * d)};
  const EffectTable effects(spam.povm, table.n_qubits);
  const std::vector<CMatrix> states = prepared_states(spam.rho0.matrix(), table.n_qubits);

  KrausEstimate est;
  est.n_qubits = table.n_qubits;
  est.fits.resize(table.slices.size());

  auto fit_one = [&](std::size_t i, const std::vector<CMatrix>& start_ops) {
    const ShotSlice& slice = table.slices[i];
    KrausFitTime& out = est.fits[i];
    out.time_us = slice.time_us;
    const KrausObjective objective{param, effects, states, slice.counts};
    const Objective f = [&](const RVector& x, RVector* g) { return objective(x, g); };
    const auto starts = perturbed_starts(param.encode(start_ops), std::max(1, config.n_starts),
                                         config.seed + i, 0.1, 0.02);
    try {
      out.report = maximize(f, starts, config);
    } catch (const OptimizerFailure& e) {
      out.report = e.report();
      out.ok = false;
      out.message = e.what();
    }
    std::vector<CMatrix> b = param.raw(out.report.params);
    out.kraus = KrausSet{d, normalized(std::move(b)), slice.time_us};
    out.loglike = slice_loglike(effects, flatten_all([&] {
                                  std::vector<CMatrix> r;
                                  for (const auto& rho : states) r.push_back(kraus_apply(out.kraus, rho));
                                  return r;
                                }()),
                                slice.counts, nullptr);
  };

  if (options.warm_start) {
    std::vector<CMatrix> start = kraus_start(data, table.slices.front().time_us);
    for (std::size_t i = 0; i < table.slices.size(); ++i) {
      fit_one(i, start);
      start = est.fits[i].kraus.operators;
    }
  } else {
    parallel_for(table.slices.size(),
                 [&](std::size_t i) { fit_one(i, kraus_start(data, table.slices[i].time_us)); });
  }
  return est;
}

}  // namespace lindtomo
