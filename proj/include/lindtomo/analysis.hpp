#pragma once

// ZZ coupling from a fitted Hamiltonian or from device parameters, and the
// free-versus-restricted comparison report.

#include <optional>
#include <vector>

#include "lindtomo/lindblad_fit.hpp"

namespace lindtomo {

// Frequencies over 2 pi in MHz; anharmonicities are negative.
struct DeviceParams {
  double g_mhz = 0.0;
  double eta_a_mhz = 0.0;
  double eta_b_mhz = 0.0;
  double delta_mhz = 0.0;  // omega_A - omega_B
};

// (H(3,3) - H(1,1) - H(2,2) + H(0,0)) / 2 pi in MHz for a 4x4 H in rad/us,
// basis order |00>, |01>, |10>, |11>.
double zz_from_hamiltonian(const CMatrix& h);

// 2 g^2 / (Delta - eta_B) + 2 g^2 / (-Delta - eta_A), with sign.
double zz_from_device_signed(const DeviceParams& p);
// Magnitude of the above.
double zz_from_device(const DeviceParams& p);

struct DeltaPoint {
  double time_us = 0.0;
  double delta = 0.0;
};

struct CompareReport {
  std::vector<DeltaPoint> delta;
  double loglike_free = 0.0;
  double loglike_restricted = 0.0;
  // Trace distance of each model's steady state to rho0; empty when the
  // steady state is not unique.
  std::optional<double> steady_distance_free;
  std::optional<double> steady_distance_restricted;
  // Two-qubit models only.
  std::optional<double> zz_free_mhz;
  std::optional<double> zz_restricted_mhz;
};

CompareReport compare_report(const LindbladEstimate& free, const LindbladEstimate& restricted,
                             const SpamEstimate& spam, const std::vector<double>& times_us);

// D(rho_ss, rho0), or nothing when the steady state is degenerate.
std::optional<double> steady_distance(const LindbladModel& model, const DensityMatrix& rho0);

}  // namespace lindtomo
