#include "lindtomo/likelihood.hpp"

#include <algorithm>
#include <limits>

#include "lindtomo/error.hpp"
#include "lindtomo/kernels.hpp"

namespace lindtomo {

ShotTable ShotTable::from(const Dataset& data) {
  ShotTable t;
  t.n_qubits = data.n_qubits;
  t.dim = Eigen::Index{1} << data.n_qubits;
  t.n_preps = count_preps(data.n_qubits);
  t.n_bases = count_bases(data.n_qubits);
  t.n_outcomes = count_outcomes(data.n_qubits);
  for (double time : data.times_us) {
    ShotSlice s;
    s.time_us = time;
    s.counts = RMatrix::Zero(t.n_effects(), t.n_preps);
    t.slices.push_back(std::move(s));
  }
  for (const auto& r : data.records) {
    const auto it = std::find(data.times_us.begin(), data.times_us.end(), r.time_us);
    if (it == data.times_us.end()) throw SchemaError("record time not listed in times_us");
    if (r.prep.n_qubits() != data.n_qubits || r.basis.n_qubits() != data.n_qubits) {
      throw SchemaError("record label does not match the qubit count");
    }
    auto& slice = t.slices[static_cast<std::size_t>(it - data.times_us.begin())];
    const int s = r.prep.index();
    const int b = r.basis.index();
    for (int o = 0; o < t.n_outcomes; ++o) {
      slice.counts(b * t.n_outcomes + o, s) += static_cast<double>(r.counts.at(static_cast<std::size_t>(o)));
    }
    slice.total_shots += static_cast<double>(r.shots);
  }
  return t;
}

std::vector<bool> ShotTable::preps_used() const {
  std::vector<bool> used(static_cast<std::size_t>(n_preps), false);
  for (const auto& s : slices) {
    for (int p = 0; p < n_preps; ++p) {
      if (s.counts.col(p).sum() > 0.0) used[static_cast<std::size_t>(p)] = true;
    }
  }
  return used;
}

void flatten_hermitian(const CMatrix& x, double* out) {
  const auto n = x.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = x.data()[i].real();
    out[n + i] = x.data()[i].imag();
  }
}

CMatrix unflatten_hermitian(const double* flat, Eigen::Index dim) {
  const auto n = dim * dim;
  CMatrix x(dim, dim);
  for (Eigen::Index i = 0; i < n; ++i) x.data()[i] = cplx(flat[i], flat[n + i]);
  return x;
}

RMatrix flatten_all(const std::vector<CMatrix>& xs) {
  if (xs.empty()) return {};
  const auto n = xs.front().size();
  RMatrix out(2 * n, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    flatten_hermitian(xs[k], out.col(static_cast<Eigen::Index>(k)).data());
  }
  return out;
}

EffectTable::EffectTable(const Povm& povm, int n_qubits) {
  if (povm.dim() != (Eigen::Index{1} << n_qubits)) {
    throw DimensionError("POVM dimension does not match the qubit count");
  }
  for (int b = 0; b < count_bases(n_qubits); ++b) {
    const CMatrix r = BasisLabel::from_index(b, n_qubits).rotation();
    for (const auto& m : povm.elements()) effects_.push_back(r.adjoint() * m * r);
  }
  cols_ = flatten_all(effects_);
  rows_ = cols_.transpose();
}

std::vector<CMatrix> prepared_states(const CMatrix& rho0, int n_qubits) {
  std::vector<CMatrix> out;
  for (int s = 0; s < count_preps(n_qubits); ++s) {
    const CMatrix r = PrepLabel::from_index(s, n_qubits).rotation();
    out.push_back(r * rho0 * r.adjoint());
  }
  return out;
}

double slice_loglike(const EffectTable& effects, const RMatrix& states_flat, const RMatrix& counts,
                     RMatrix* ratio) {
  const auto& k = kernels::active();
  const RMatrix& e = effects.rows();
  RMatrix probs(e.rows(), states_flat.cols());
  k.dgemm(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(states_flat.cols()),
          static_cast<std::size_t>(e.cols()), e.data(), static_cast<std::size_t>(e.rows()),
          states_flat.data(), static_cast<std::size_t>(states_flat.rows()), probs.data(),
          static_cast<std::size_t>(probs.rows()));
  // Probabilities of a physical model lie in [0, 1]; anything else means
  // the propagation broke down numerically.
  const double lo = probs.minCoeff(), hi = probs.maxCoeff();
  if (!(lo >= -1e-6 && hi <= 1.0 + 1e-6)) return -std::numeric_limits<double>::infinity();
  if (ratio) ratio->resize(probs.rows(), probs.cols());
  return k.weighted_log(counts.data(), probs.data(), static_cast<std::size_t>(probs.size()),
                        kProbFloor, ratio ? ratio->data() : nullptr);
}

RMatrix state_gradients(const EffectTable& effects, const RMatrix& ratio) {
  const auto& k = kernels::active();
  const RMatrix& c = effects.cols();
  RMatrix out(c.rows(), ratio.cols());
  k.dgemm(static_cast<std::size_t>(c.rows()), static_cast<std::size_t>(ratio.cols()),
          static_cast<std::size_t>(c.cols()), c.data(), static_cast<std::size_t>(c.rows()),
          ratio.data(), static_cast<std::size_t>(ratio.rows()), out.data(),
          static_cast<std::size_t>(out.rows()));
  return out;
}

RMatrix effect_gradients(const RMatrix& states_flat, const RMatrix& ratio) {
  const auto& k = kernels::active();
  const RMatrix rt = ratio.transpose();
  RMatrix out(states_flat.rows(), rt.cols());
  k.dgemm(static_cast<std::size_t>(states_flat.rows()), static_cast<std::size_t>(rt.cols()),
          static_cast<std::size_t>(states_flat.cols()), states_flat.data(),
          static_cast<std::size_t>(states_flat.rows()), rt.data(),
          static_cast<std::size_t>(rt.rows()), out.data(), static_cast<std::size_t>(out.rows()));
  return out;
}

}  // namespace lindtomo
