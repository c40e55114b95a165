#pragma once

// Closed-form exponential fits on raw subsets of a dataset (population of
// prep "1" in z, transverse Bloch vector of prep "+"), used to seed the
// likelihood searches.

#include <vector>

#include "lindtomo/synthdata.hpp"

namespace lindtomo {

struct CoherencePrefit {
  double gamma1 = 0.0;     // population decay, 1/us
  double gamma2 = 0.0;     // coherence decay, 1/us
  double detuning = 0.0;   // precession of the Bloch vector about z, rad/us
};

// Single-qubit dataset.
CoherencePrefit coherence_prefit(const Dataset& data);

// One entry per qubit; for two qubits each uses the records with the other
// qubit prepared in "0" and measured in z.
std::vector<CoherencePrefit> per_qubit_prefit(const Dataset& data);

// Difference of qubit A's precession with B prepared in "0" and in "1"
// (rad/us); aliasing limits it to |value| < pi / (time step).
double zz_prefit(const Dataset& data);

// Amplitude damping, pure dephasing and the precession reproducing the
// pre-fit at time t, as four Kraus operators.
std::vector<CMatrix> decay_kraus(const CoherencePrefit& p, double t_us);

}  // namespace lindtomo
