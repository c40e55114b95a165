#include <doctest.h>

#include <random>

#include "lindtomo/analysis.hpp"
#include "lindtomo/kraus_fit.hpp"
#include "lindtomo/lindblad_fit.hpp"
#include "support/oracles.hpp"
#include "support/published.hpp"

using namespace lindtomo;

namespace {

LindbladModel qubit_truth() {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 0.1;
  h(1, 1) = -0.1;
  const auto r = restricted_jumps(1);
  return lindblad_from_jumps(h, {{0.05, 0.03}, r.jumps});
}

SpamTruth qubit_spam() {
  CMatrix m0 = CMatrix::Zero(2, 2);
  m0(0, 0) = 1.0;
  m0(1, 1) = 0.04;
  return {DensityMatrix::thermal(0.92), Povm::from({m0, CMatrix::Identity(2, 2) - m0})};
}

SpamEstimate as_estimate(const SpamTruth& s) { return {s.rho0, s.povm, 0.0, {}}; }

}  // namespace

TEST_CASE("restricted jump operators") {
  const auto one = restricted_jumps(1);
  CHECK(one.names == std::vector<std::string>{"a", "d"});
  const auto two = restricted_jumps(2);
  CHECK(two.names.size() == 4);
  for (const auto& j : two.jumps) CHECK(std::abs((j * j.adjoint()).trace() - 1.0) < 1e-12);
  // a1 damps qubit B, a2 damps qubit A.
  CHECK(std::abs(two.jumps[0](0, 1)) > 0.1);
  CHECK(std::abs(two.jumps[1](0, 2)) > 0.1);
}

TEST_CASE("analytic gradient matches finite differences") {
  std::mt19937_64 rng(7);
  for (int n : {1, 2}) {
    const int d = 1 << n;
    const LindbladModel truth = oracle::random_model(rng, d, 0.5, 0.05);
    const SpamTruth spam = n == 1 ? qubit_spam() : ideal_spam(2);
    const Dataset data = generate(truth, spam, {0.0, 3.0, 9.0}, 500, 1);
    for (LindbladMode mode : {LindbladMode::free, LindbladMode::restricted}) {
      const auto p = lindblad_detail::make_problem(data, as_estimate(spam), mode);
      const Eigen::Index np = lindblad_detail::parameter_count(*p);
      // Traceless H plus either a full Cholesky factor or one value per jump.
      const int m = d * d - 1;
      CHECK(np == (mode == LindbladMode::free ? m + m * m : m + 2 * n));
      std::normal_distribution<double> nd(0.0, 0.1);
      RVector x = lindblad_detail::encode(*p, truth);
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += nd(rng);
      RVector grad(np);
      lindblad_detail::evaluate(*p, x, &grad);
      const RVector fd = fd_gradient([&](const RVector& y) { return lindblad_detail::evaluate(*p, y, nullptr); }, x);
      CHECK((grad - fd).norm() < 1e-4 * (1.0 + fd.norm()));
    }
  }
}

TEST_CASE("encode and decode are inverse") {
  const LindbladModel truth = qubit_truth();
  const Dataset data = generate(truth, qubit_spam(), {0.0, 5.0}, 100, 1);
  for (LindbladMode mode : {LindbladMode::free, LindbladMode::restricted}) {
    const auto p = lindblad_detail::make_problem(data, as_estimate(qubit_spam()), mode);
    const LindbladModel back = lindblad_detail::decode(*p, lindblad_detail::encode(*p, truth));
    CHECK(max_abs(back.lindblad_matrix() - truth.lindblad_matrix()) < 1e-8);
    CHECK(max_abs(back.hamiltonian() - truth.hamiltonian()) < 1e-10);
  }
}

TEST_CASE("single-qubit fits recover the generator") {
  const LindbladModel truth = qubit_truth();
  const SpamTruth spam = qubit_spam();
  const Dataset data = generate(truth, spam, parse_time_grid("lin:0:80:20"), 2000, 3);
  const SpamEstimate s = as_estimate(spam);
  const LindbladEstimate restricted = fit_lindblad(data, s, LindbladMode::restricted);
  const LindbladEstimate free = fit_lindblad(data, s, LindbladMode::free);
  REQUIRE(restricted.restricted_rates.size() == 2);
  CHECK(std::abs(restricted.restricted_rates[0] - 0.05) < 0.2 * 0.05);
  CHECK(std::abs(restricted.restricted_rates[1] - 0.03) < 0.2 * 0.03);
  // Nested models: the free optimum is at least as likely.
  CHECK(free.loglike >= restricted.loglike - 1e-6);
  CHECK(free.loglike >= loglike_lt(truth, s, data) - 1e-6);
  CHECK(deviation_delta(free.model, truth, 40.0) < 0.1);
  // At the truth the deviance per degree of freedom is near one.
  const auto dev = sequence_deviance(truth, s, data);
  CHECK(dev.size() == 18);
  double mean = 0.0;
  for (const auto& d : dev) mean += d.reduced();
  mean /= static_cast<double>(dev.size());
  CHECK(std::abs(mean - 1.0) < 0.3);
  CHECK(std::abs(free.mean_reduced_deviance - 1.0) < 0.3);
}

TEST_CASE("generator likelihood equals the channel likelihood at every time") {
  const LindbladModel truth = qubit_truth();
  const SpamTruth spam = qubit_spam();
  const std::vector<double> times{0.0, 4.0, 12.0};
  const Dataset data = generate(truth, spam, times, 300, 2);
  double sum = 0.0;
  for (double t : times) {
    sum += loglike_kraus(kraus_from_choi(choi_of(liouvillian(truth), t), t), as_estimate(spam), data, t);
  }
  CHECK(std::abs(loglike_lt(truth, as_estimate(spam), data) - sum) < 1e-8 * std::abs(sum));
}

TEST_CASE("steady states") {
  const LindbladModel damping = lindblad_from_jumps(CMatrix::Zero(2, 2), {{0.1}, {matrix_unit(2, 0, 1)}});
  CHECK(max_abs(steady_state(damping).matrix() - matrix_unit(2, 0, 0)) < 1e-10);
  // Detailed balance between decay and excitation.
  const LindbladModel thermal =
      lindblad_from_jumps(CMatrix::Zero(2, 2), {{0.09, 0.01}, {matrix_unit(2, 0, 1), matrix_unit(2, 1, 0)}});
  CHECK(max_abs(steady_state(thermal).matrix() - DensityMatrix::thermal(0.9).matrix()) < 1e-10);
  CHECK_THROWS_AS(steady_state(LindbladModel::zero(2)), ModelError);
}

TEST_CASE("deviation between generators") {
  std::mt19937_64 rng(9);
  const LindbladModel a = oracle::random_model(rng, 2, 0.5, 0.1);
  const LindbladModel b = oracle::random_model(rng, 2, 0.5, 0.1);
  CHECK(deviation_delta(a, a, 10.0) < 1e-6);
  CHECK(deviation_delta(a, b, 0.0) < 1e-6);
  const double t = 6.0;
  const double brute = oracle::diamond_brute_force(choi_of(liouvillian(a), t) - choi_of(liouvillian(b), t));
  CHECK(std::abs(deviation_delta(a, b, t) - brute) < 1e-3);
}

TEST_CASE("published free and restricted generators") {
  const LindbladModel free = lindblad_from_jumps(published::h_free(),
                                                 {published::rates_free(), published::jumps_free()});
  const LindbladModel restricted = lindblad_from_jumps(
      published::h_restricted(), {published::rates_restricted(), restricted_jumps(2).jumps});
  CHECK(deviation_delta(free, restricted, 0.0) < 1e-6);
  double prev = 0.0;
  for (double t : {1.0, 5.0, 20.0, 80.0}) {
    const double d = deviation_delta(free, restricted, t);
    CHECK(d >= 0.0);
    CHECK(d <= 2.0 + 1e-9);
    if (t <= 5.0) CHECK(d >= prev - 1e-9);
    prev = d;
  }
}

TEST_CASE("mode names") {
  CHECK(parse_mode("free") == LindbladMode::free);
  CHECK(to_string(LindbladMode::restricted) == "restricted");
  CHECK_THROWS_AS(parse_mode("partial"), SchemaError);
}

TEST_CASE("zero generator on zero-delay data is the SPAM likelihood") {
  const SpamTruth spam = qubit_spam();
  const Dataset data = generate(qubit_truth(), spam, {0.0}, 1000, 1);
  CHECK(std::abs(loglike_lt(LindbladModel::zero(2), as_estimate(spam), data) -
                 loglike_spam(spam.rho0, spam.povm, data)) < 1e-9);
}

TEST_CASE("truth beats perturbed models on near-noiseless data") {
  const LindbladModel truth = qubit_truth();
  const SpamTruth spam = qubit_spam();
  Dataset data = generate(truth, spam, parse_time_grid("lin:0:80:8"), 1000000, 1);
  // Replace the draws by their rounded expectations.
  for (auto& r : data.records) {
    const DensityMatrix rho = evolve(truth, ideal_prep_state(r.prep, spam.rho0), r.time_us);
    const auto p = outcome_probabilities(rho.matrix(), r.basis, spam.povm);
    for (std::size_t o = 0; o < p.size(); ++o) r.counts[o] = std::llround(1e6 * p[o]);
    r.shots = r.counts[0] + r.counts[1];
  }
  const double best = loglike_lt(truth, as_estimate(spam), data);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const LindbladModel dm = oracle::random_model(rng, 2, 0.01, 0.01);
    const LindbladModel perturbed = LindbladModel::from(truth.hamiltonian() + dm.hamiltonian(),
                                                        truth.lindblad_matrix() + dm.lindblad_matrix());
    CHECK(best > loglike_lt(perturbed, as_estimate(spam), data));
  }
}

TEST_CASE("two-qubit restricted truth with a ZZ shift") {
  // Level splittings stay below the Nyquist frequency of the 4.2 us grid.
  CMatrix h = CMatrix::Zero(4, 4);
  h.diagonal() << 0.0, -0.25, -0.40, 0.30;
  const LindbladModel truth =
      lindblad_from_jumps(h, {published::rates_restricted(), restricted_jumps(2).jumps});
  const double zz_truth = zz_from_hamiltonian(truth.hamiltonian());
  CHECK(std::abs(zz_truth - 0.95 / (2 * M_PI)) < 1e-12);
  const SpamTruth spam = ideal_spam(2);
  const Dataset data = generate(truth, spam, parse_time_grid("lin:0:80:20"), 1000, 4);
  OptimizerConfig cfg;
  cfg.n_starts = 2;
  const LindbladEstimate restricted = fit_lindblad(data, as_estimate(spam), LindbladMode::restricted, cfg);
  REQUIRE(restricted.restricted_rates.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const double want = published::rates_restricted()[k];
    CHECK(std::abs(restricted.restricted_rates[k] - want) <= 0.2 * want);
  }
  CHECK(std::abs(zz_from_hamiltonian(restricted.model.hamiltonian()) - zz_truth) <= 0.05 * std::abs(zz_truth));
  const LindbladEstimate free = fit_lindblad(data, as_estimate(spam), LindbladMode::free, cfg);
  CHECK(free.loglike >= restricted.loglike - 1e-6);
}

TEST_CASE("published generators at long times") {
  const LindbladModel free = lindblad_from_jumps(published::h_free(),
                                                 {published::rates_free(), published::jumps_free()});
  const LindbladModel restricted = lindblad_from_jumps(
      published::h_restricted(), {published::rates_restricted(), restricted_jumps(2).jumps});
  const double late = deviation_delta(free, restricted, 1000.0);
  CHECK(late >= 0.34);
  CHECK(late <= 0.54);
  const CMatrix rho0 = published::rho0_ab() / published::rho0_ab().trace().real();
  const double d = trace_distance(steady_state(free).matrix(), rho0);
  CHECK(std::abs(d - 0.06) <= 0.04);
}
