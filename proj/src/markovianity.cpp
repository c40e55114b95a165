#include "lindtomo/markovianity.hpp"

#include <algorithm>
#include <cmath>

#include "lindtomo/error.hpp"
#include "lindtomo/parallel.hpp"

namespace lindtomo {

std::vector<DistancePoint> distance_series(const std::vector<KrausSet>& channels,
                                           const CMatrix& rho1, const CMatrix& rho2) {
  std::vector<DistancePoint> out;
  for (const auto& k : channels) {
    out.push_back({k.time_us, trace_distance(kraus_apply(k, rho1), kraus_apply(k, rho2))});
  }
  return out;
}

double positive_increments(const std::vector<DistancePoint>& series) {
  double s = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    s += std::max(0.0, series[i].distance - series[i - 1].distance);
  }
  return s;
}

std::vector<PrepLabel> all_preps(int n_qubits) {
  std::vector<PrepLabel> out;
  for (int s = 0; s < count_preps(n_qubits); ++s) out.push_back(PrepLabel::from_index(s, n_qubits));
  return out;
}

MarkovReport n_markov(const std::vector<KrausSet>& channels,
                      const std::vector<PrepLabel>& candidates,
                      const std::optional<DensityMatrix>& rho0) {
  if (channels.size() < 2) throw ModelError("n_markov needs at least two times");
  if (candidates.size() < 2) throw ModelError("n_markov needs at least two candidate states");
  const auto d = channels.front().dim;
  const int n = qubits_for_dim(d);
  const CMatrix base = rho0 ? rho0->matrix() : DensityMatrix::ground(n).matrix();
  if (base.rows() != d) throw DimensionError("n_markov: state dimension mismatch");
  std::vector<CMatrix> states;
  for (const auto& c : candidates) {
    if (c.n_qubits() != n) throw DimensionError("n_markov: candidate label arity mismatch");
    const CMatrix r = c.rotation();
    states.push_back(r * base * r.adjoint());
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    values[p] = positive_increments(
        distance_series(channels, states[pairs[p].first], states[pairs[p].second]));
  });
  const auto best = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());

  MarkovReport report;
  report.n_markov = values[best];
  report.best_pair = {candidates[pairs[best].first], candidates[pairs[best].second]};
  report.series = distance_series(channels, states[pairs[best].first], states[pairs[best].second]);
  for (std::size_t i = 1; i < report.series.size(); ++i) {
    report.increments.push_back({report.series[i - 1].time_us, report.series[i].time_us,
                                 report.series[i].distance - report.series[i - 1].distance});
  }
  return report;
}

double noise_floor(const std::vector<KrausSet>& channels, const SpamEstimate& spam,
                   const std::vector<PrepLabel>& candidates, const NoiseFloorOptions& options) {
  if (options.resamples < 1) throw ModelError("noise_floor needs at least one resample");
  const SpamTruth truth{spam.rho0, spam.povm};
  std::vector<double> values(static_cast<std::size_t>(options.resamples));
  parallel_for(values.size(), [&](std::size_t r) {
    const Dataset data =
        generate_from_channels(channels, truth, options.shots, options.seed + 7919 * (r + 1));
    const KrausEstimate fit = fit_kraus(data, spam, options.fit);
    values[r] = n_markov(fit.channels(), candidates).n_markov;
  });
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(options.quantile * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

}  // namespace lindtomo
