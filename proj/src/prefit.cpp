#include "lindtomo/prefit.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "lindtomo/error.hpp"

namespace lindtomo {

namespace {

struct Sample {
  double t;
  double y;
  double w;
};

// Weighted least-squares slope of y = a + b t.
double slope(const std::vector<Sample>& s) {
  double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (const auto& p : s) {
    sw += p.w;
    st += p.w * p.t;
    sy += p.w * p.y;
    stt += p.w * p.t * p.t;
    sty += p.w * p.t * p.y;
  }
  const double den = sw * stt - st * st;
  if (s.size() < 2 || !(den > 0.0)) return 0.0;
  return (sw * sty - st * sy) / den;
}

// Residual of the best y = c + a exp(-g t) for fixed g (linear in c, a).
double exp_residual(const std::vector<Sample>& s, double g) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(s.size()), 2);
  Eigen::VectorXd y(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const auto& p = s[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = std::exp(-g * p.t);
    y(i) = p.y;
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
  return (a * c - y).squaredNorm();
}

// Decay rate of y = c + a exp(-g t): log grid followed by golden section.
double decay_rate(const std::vector<Sample>& s) {
  if (s.size() < 3) return 0.0;
  const double span = s.back().t - s.front().t;
  if (!(span > 0.0)) return 0.0;
  const double lo = 0.01 / span, hi = 100.0 / span;
  constexpr int kGrid = 120;
  int best = 0;
  double best_r = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double r = exp_residual(s, lo * std::pow(hi / lo, double(i) / kGrid));
    if (r < best_r) {
      best_r = r;
      best = i;
    }
  }
  double a = std::log(lo) + std::log(hi / lo) * std::max(0, best - 1) / kGrid;
  double b = std::log(lo) + std::log(hi / lo) * std::min(kGrid, best + 1) / kGrid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  while (b - a > 1e-6) {
    const double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    if (exp_residual(s, std::exp(x1)) <= exp_residual(s, std::exp(x2))) {
      b = x2;
    } else {
      a = x1;
    }
  }
  return std::exp(0.5 * (a + b));
}

// Fraction of outcome 0 for (prep, basis) at every time, NaN when missing.
std::vector<double> fractions(const Dataset& data, PrepSymbol prep, BasisSymbol basis) {
  std::vector<double> out;
  for (double t : data.times_us) {
    double zero = 0, total = 0;
    for (const auto* r : data.at_time(t)) {
      if (r->prep.symbols[0] != prep || r->basis.symbols[0] != basis) continue;
      zero += static_cast<double>(r->counts[0]);
      total += static_cast<double>(r->shots);
    }
    out.push_back(total > 0 ? zero / total : std::nan(""));
  }
  return out;
}

}  // namespace

CoherencePrefit coherence_prefit(const Dataset& data) {
  if (data.n_qubits != 1) throw DimensionError("coherence_prefit needs a single-qubit dataset");
  CoherencePrefit out;
  const auto& times = data.times_us;

  const auto z1 = fractions(data, PrepSymbol::one, BasisSymbol::z);
  if (!std::isnan(z1[0])) {
    const double p0 = 1.0 - z1[0];
    std::vector<Sample> s;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!std::isnan(z1[i])) s.push_back({times[i], 1.0 - z1[i], 1.0});
    }
    if (p0 > 0.0) out.gamma1 = decay_rate(s);
  }

  const auto px = fractions(data, PrepSymbol::plus, BasisSymbol::x);
  const auto py = fractions(data, PrepSymbol::plus, BasisSymbol::y);
  if (!std::isnan(px[0]) && !std::isnan(py[0])) {
    std::vector<Sample> mag, phase;
    double r0 = 0.0, last = 0.0, unwrapped = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (std::isnan(px[i]) || std::isnan(py[i])) continue;
      const double x = 2.0 * px[i] - 1.0;
      const double y = 2.0 * py[i] - 1.0;
      const double r = std::hypot(x, y);
      if (first) r0 = r;
      if (r <= 0.0) continue;
      mag.push_back({times[i], r, 1.0});
      if (r < 0.2 * r0) continue;
      const double ph = std::atan2(y, x);
      if (first) {
        unwrapped = ph;
      } else {
        unwrapped += std::remainder(ph - last, 2.0 * std::numbers::pi);
      }
      last = ph;
      first = false;
      phase.push_back({times[i], unwrapped, r * r});
    }
    out.gamma2 = decay_rate(mag);
    out.detuning = slope(phase);
  }
  return out;
}

std::vector<CoherencePrefit> per_qubit_prefit(const Dataset& data) {
  if (data.n_qubits == 1) return {coherence_prefit(data)};
  const PrepLabel zero{{PrepSymbol::zero}};
  const BasisLabel z{{BasisSymbol::z}};
  return {coherence_prefit(marginal_dataset(data, 0, zero, z)),
          coherence_prefit(marginal_dataset(data, 1, zero, z))};
}

double zz_prefit(const Dataset& data) {
  if (data.n_qubits != 2) throw DimensionError("zz_prefit needs a two-qubit dataset");
  const BasisLabel z{{BasisSymbol::z}};
  const auto b0 = coherence_prefit(marginal_dataset(data, 0, PrepLabel{{PrepSymbol::zero}}, z));
  const auto b1 = coherence_prefit(marginal_dataset(data, 0, PrepLabel{{PrepSymbol::one}}, z));
  return b0.detuning - b1.detuning;
}

std::vector<CMatrix> decay_kraus(const CoherencePrefit& p, double t_us) {
  const double damp = 1.0 - std::exp(-p.gamma1 * t_us);
  const double f = std::exp(-std::max(0.0, p.gamma2 - 0.5 * p.gamma1) * t_us);
  CMatrix a0 = CMatrix::Zero(2, 2), a1 = CMatrix::Zero(2, 2);
  a0(0, 0) = 1.0;
  a0(1, 1) = std::sqrt(1.0 - damp);
  a1(0, 1) = std::sqrt(damp);
  CMatrix z = CMatrix::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  const double c0 = std::sqrt(0.5 * (1.0 + f));
  const double c1 = std::sqrt(0.5 * (1.0 - f));
  // Precession about z commutes with both channels.
  CMatrix u = CMatrix::Zero(2, 2);
  u(0, 0) = std::exp(cplx(0.0, -0.5 * p.detuning * t_us));
  u(1, 1) = std::conj(u(0, 0));
  return {c0 * u * a0, c0 * u * a1, c1 * u * z * a0, c1 * u * z * a1};
}

}  // namespace lindtomo
