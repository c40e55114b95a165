#pragma once

// Tomography datasets: sequence enumeration, the shot-count record format,
// synthetic generation from a known model, and record filtering.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lindtomo/dynamics.hpp"
#include "lindtomo/quantum.hpp"

namespace lindtomo {

inline constexpr std::int64_t kDefaultShots = 1000;

struct SpamTruth {
  DensityMatrix rho0;
  Povm povm;
};

SpamTruth ideal_spam(int n_qubits);

struct SequenceRecord {
  PrepLabel prep;
  BasisLabel basis;
  double time_us = 0.0;
  std::int64_t shots = 0;
  std::vector<std::int64_t> counts;  // indexed by outcome (bitstring value)
};

struct Dataset {
  int n_qubits = 1;
  std::vector<double> times_us;
  std::int64_t shots_nominal = 0;
  std::vector<SequenceRecord> records;

  // Throws SchemaError on broken invariants (count sums, label arity,
  // unknown times, times not starting at 0).
  void validate() const;
  // Records whose time equals t (exact match on the stored value).
  std::vector<const SequenceRecord*> at_time(double t) const;
  std::size_t sequences_at(double t) const { return at_time(t).size(); }
};

std::vector<std::pair<PrepLabel, BasisLabel>> enumerate_sequences(int n_qubits);

// R_s rho0 R_s^dagger for a perfect preparation pulse.
DensityMatrix ideal_prep_state(const PrepLabel& prep, const DensityMatrix& rho0);

// Outcome probabilities Tr[R_b rho R_b^dagger M_o] of a measurement in basis b.
std::vector<double> outcome_probabilities(const CMatrix& rho, const BasisLabel& basis,
                                          const Povm& povm);

// Multinomial draw; the generator is seeded from (seed, stream) so that
// every sequence has an independent, order-independent stream.
std::vector<std::int64_t> sample_counts(const std::vector<double>& probs, std::int64_t shots,
                                        std::uint64_t seed, std::uint64_t stream);

Dataset generate(const LindbladModel& truth, const SpamTruth& spam,
                 const std::vector<double>& times_us, std::int64_t shots, std::uint64_t seed);

// Same protocol with an arbitrary channel per time instead of a generator.
Dataset generate_from_channels(const std::vector<KrausSet>& channels, const SpamTruth& spam,
                               std::int64_t shots, std::uint64_t seed);

// Conjunction of optional constraints; a record is dropped when it matches
// any filter of the list.
struct ExclusionFilter {
  std::optional<PrepLabel> prep;
  std::optional<BasisLabel> basis;
  std::optional<double> time_us;

  bool matches(const SequenceRecord& r) const;
};

// "prep=-i,basis=y,time=4.2"
ExclusionFilter parse_filter(std::string_view text);
Dataset exclude(const Dataset& data, const std::vector<ExclusionFilter>& filters);

// Single-qubit dataset of qubit `keep` from the records where the other
// qubit carries the given pulses, summing counts over its outcomes.
Dataset marginal_dataset(const Dataset& data, int keep, const PrepLabel& other_prep,
                         const BasisLabel& other_basis);

// "lin:a:b:n", "log:a:b:n" (0 followed by n-1 log-spaced points from a to b)
// or an explicit comma-separated list.
std::vector<double> parse_time_grid(std::string_view grid);

}  // namespace lindtomo
