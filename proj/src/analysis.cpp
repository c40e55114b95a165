#include "lindtomo/analysis.hpp"

#include <cmath>
#include <numbers>

#include "lindtomo/error.hpp"
#include "lindtomo/parallel.hpp"

namespace lindtomo {

double zz_from_hamiltonian(const CMatrix& h) {
  if (h.rows() != 4 || h.cols() != 4) throw DimensionError("zz_from_hamiltonian: H must be 4x4");
  const double s = h(3, 3).real() - h(1, 1).real() - h(2, 2).real() + h(0, 0).real();
  return s / (2.0 * std::numbers::pi);
}

double zz_from_device_signed(const DeviceParams& p) {
  constexpr double kResonance = 1e-3;  // MHz
  const double den_b = p.delta_mhz - p.eta_b_mhz;
  const double den_a = -p.delta_mhz - p.eta_a_mhz;
  if (std::abs(den_b) < kResonance || std::abs(den_a) < kResonance) {
    throw ModelError("zz_from_device: resonant denominator");
  }
  const double g2 = p.g_mhz * p.g_mhz;
  return 2.0 * g2 / den_b + 2.0 * g2 / den_a;
}

double zz_from_device(const DeviceParams& p) { return std::abs(zz_from_device_signed(p)); }

std::optional<double> steady_distance(const LindbladModel& model, const DensityMatrix& rho0) {
  try {
    return trace_distance(steady_state(model).matrix(), rho0.matrix());
  } catch (const ModelError&) {
    return std::nullopt;
  }
}

CompareReport compare_report(const LindbladEstimate& free, const LindbladEstimate& restricted,
                             const SpamEstimate& spam, const std::vector<double>& times_us) {
  if (free.model.dim() != restricted.model.dim() || free.model.dim() != spam.rho0.dim()) {
    throw DimensionError("compare_report: dimension mismatch");
  }
  CompareReport r;
  r.delta.resize(times_us.size());
  parallel_for(times_us.size(), [&](std::size_t i) {
    r.delta[i] = {times_us[i], deviation_delta(free.model, restricted.model, times_us[i])};
  });
  r.loglike_free = free.loglike;
  r.loglike_restricted = restricted.loglike;
  r.steady_distance_free = steady_distance(free.model, spam.rho0);
  r.steady_distance_restricted = steady_distance(restricted.model, spam.rho0);
  if (free.model.dim() == 4) {
    r.zz_free_mhz = zz_from_hamiltonian(free.model.hamiltonian());
    r.zz_restricted_mhz = zz_from_hamiltonian(restricted.model.hamiltonian());
  }
  return r;
}

}  // namespace lindtomo
