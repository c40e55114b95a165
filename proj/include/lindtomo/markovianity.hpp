#pragma once

// Discrete-time trace-distance (BLP) non-Markovianity of a family of
// channels sampled at increasing times.

#include <optional>
#include <utility>
#include <vector>

#include "lindtomo/kraus_fit.hpp"

namespace lindtomo {

struct DistancePoint {
  double time_us = 0.0;
  double distance = 0.0;
};

struct MarkovIncrement {
  double t_from = 0.0;
  double t_to = 0.0;
  double delta = 0.0;  // D(t_to) - D(t_from); only positive values count
};

struct MarkovReport {
  double n_markov = 0.0;
  std::pair<PrepLabel, PrepLabel> best_pair;
  std::vector<DistancePoint> series;
  std::vector<MarkovIncrement> increments;
  std::optional<double> noise_floor;
};

std::vector<DistancePoint> distance_series(const std::vector<KrausSet>& channels,
                                           const CMatrix& rho1, const CMatrix& rho2);

// Sum of the positive increments of a series.
double positive_increments(const std::vector<DistancePoint>& series);

// Exhaustive search over unordered candidate pairs. Candidates are the ideal
// pure preparations R_s|0...0>, or R_s rho0 R_s^dagger when rho0 is given.
// Ties keep the first pair in candidate order.
MarkovReport n_markov(const std::vector<KrausSet>& channels,
                      const std::vector<PrepLabel>& candidates,
                      const std::optional<DensityMatrix>& rho0 = std::nullopt);

// All preparation labels for n qubits.
std::vector<PrepLabel> all_preps(int n_qubits);

struct NoiseFloorOptions {
  int resamples = 100;
  std::int64_t shots = kDefaultShots;
  std::uint64_t seed = 0;
  double quantile = 0.95;
  OptimizerConfig fit;
};

// Quantile of N_markov over Kraus refits of datasets resampled from the
// given channels and SPAM: the level reached by sampling noise alone.
double noise_floor(const std::vector<KrausSet>& channels, const SpamEstimate& spam,
                   const std::vector<PrepLabel>& candidates, const NoiseFloorOptions& options = {});

}  // namespace lindtomo
