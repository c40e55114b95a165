#include <doctest.h>

#include "lindtomo/kraus_fit.hpp"
#include "support/oracles.hpp"
#include "support/published.hpp"

using namespace lindtomo;

namespace {

LindbladModel qubit_truth() {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 0.2;
  h(1, 1) = -0.2;
  return lindblad_from_jumps(h, {{0.04, 0.03}, {matrix_unit(2, 0, 1), oracle::pauli('Z') / std::sqrt(2.0)}});
}

SpamTruth qubit_spam() {
  CMatrix m0 = CMatrix::Zero(2, 2);
  m0(0, 0) = 1.0;
  m0(1, 1) = 0.04;
  return {DensityMatrix::thermal(0.9), Povm::from({m0, CMatrix::Identity(2, 2) - m0})};
}

SpamEstimate known_spam(const SpamTruth& s) { return {s.rho0, s.povm, 0.0, {}}; }

CMatrix identity_choi(int d) { return choi_from_superop(CMatrix::Identity(d * d, d * d)); }

}  // namespace

TEST_CASE("per-time Kraus fits recover the channel") {
  const LindbladModel truth = qubit_truth();
  const SpamTruth spam = qubit_spam();
  const std::vector<double> times{0.0, 10.0, 30.0};
  const Dataset data = generate(truth, spam, times, 20000, 5);
  const KrausEstimate est = fit_kraus(data, known_spam(spam));
  REQUIRE(est.fits.size() == times.size());
  CHECK(est.ok());
  CHECK(est.n_qubits == 1);
  for (const auto& f : est.fits) {
    CHECK(f.ok);
    CHECK(f.kraus.completeness_error() < 1e-8);
    const CMatrix expect = choi_of(liouvillian(truth), f.time_us);
    CHECK(diamond_distance(choi_of(f.kraus), expect) < 0.1);
    // The estimate is at least as likely as the truth and as its start.
    const KrausSet truth_k = kraus_from_choi(expect, f.time_us);
    CHECK(f.loglike >= loglike_kraus(truth_k, known_spam(spam), data, f.time_us) - 1e-6);
    const KrausSet start{2, kraus_start(data, f.time_us), f.time_us};
    CHECK(f.loglike >= loglike_kraus(start, known_spam(spam), data, f.time_us) - 1e-6);
  }
  CHECK(diamond_distance(choi_of(est.fits[0].kraus), identity_choi(2)) < 0.05);
  CHECK(est.channels().size() == times.size());
}

TEST_CASE("warm starts reach the same optimum") {
  const LindbladModel truth = qubit_truth();
  const SpamTruth spam = qubit_spam();
  const Dataset data = generate(truth, spam, {0.0, 5.0, 10.0}, 5000, 8);
  const KrausEstimate cold = fit_kraus(data, known_spam(spam));
  const KrausEstimate warm = fit_kraus(data, known_spam(spam), {}, {true});
  for (std::size_t k = 0; k < cold.fits.size(); ++k) {
    CHECK(std::abs(cold.fits[k].loglike - warm.fits[k].loglike) < 1e-3);
  }
}

TEST_CASE("two-qubit Kraus fit at one delay") {
  const CMatrix h = oracle::zz_hamiltonian(0.4);
  const LindbladModel truth = LindbladModel::from(h, CMatrix::Zero(15, 15));
  const Dataset data = generate(truth, ideal_spam(2), {0.0, 4.0}, 5000, 2);
  const KrausEstimate est = fit_kraus(data, known_spam(ideal_spam(2)));
  REQUIRE(est.fits.size() == 2);
  for (const auto& f : est.fits) {
    CHECK(f.kraus.completeness_error() < 1e-8);
    CHECK(diamond_distance(choi_of(f.kraus), choi_of(liouvillian(truth), f.time_us)) < 0.2);
  }
}

TEST_CASE("start operators") {
  const Dataset data = generate(qubit_truth(), qubit_spam(), {0.0, 10.0}, 1000, 1);
  const auto ops = kraus_start(data, 10.0);
  CHECK(ops.size() == 4);
  CHECK(KrausSet{2, ops, 10.0}.completeness_error() < 1e-10);
}

TEST_CASE("channel likelihood reduces to the SPAM likelihood at zero delay") {
  const SpamTruth spam = qubit_spam();
  const Dataset data = generate(qubit_truth(), spam, {0.0, 10.0}, 1000, 4);
  const KrausSet id{2, {CMatrix::Identity(2, 2)}, 0.0};
  CHECK(std::abs(loglike_kraus(id, known_spam(spam), data, 0.0) -
                 loglike_spam(spam.rho0, spam.povm, zero_delay_slice(data))) < 1e-9);
  const KrausSet truth = kraus_from_choi(choi_of(liouvillian(qubit_truth()), 10.0), 10.0);
  CHECK(loglike_kraus(truth, known_spam(spam), data, 10.0) >
        loglike_kraus(KrausSet{2, {CMatrix::Identity(2, 2)}, 10.0}, known_spam(spam), data, 10.0));
}

TEST_CASE("zero-delay fit with ideal SPAM is the identity") {
  const Dataset data = generate(LindbladModel::zero(2), ideal_spam(1), {0.0}, 1000, 3);
  const KrausEstimate est = fit_kraus(data, known_spam(ideal_spam(1)));
  CHECK(diamond_distance(choi_of(est.fits[0].kraus), identity_choi(2)) <= 0.02);
}

TEST_CASE("published single-qubit generator at 10 us") {
  auto jumps = published::jumps_1q();
  for (auto& j : jumps) j /= std::sqrt((j * j.adjoint()).trace().real());
  const LindbladModel truth = lindblad_from_jumps(CMatrix::Zero(2, 2), {published::rates_1q(), jumps});
  const SpamTruth spam = qubit_spam();
  const Dataset data = generate(truth, spam, {0.0, 10.0}, 1000, 7);
  const KrausEstimate est = fit_kraus(data, known_spam(spam));
  CHECK(diamond_distance(choi_of(est.fits[1].kraus), choi_of(liouvillian(truth), 10.0)) <= 0.1);
}

TEST_CASE("fitted ZZ channel is entangling") {
  const double omega = 2 * M_PI * 0.416;
  const LindbladModel truth = LindbladModel::from(oracle::zz_hamiltonian(omega), CMatrix::Zero(15, 15));
  const double t = M_PI / omega;
  const Dataset data = generate(truth, ideal_spam(2), {0.0, t}, 2000, 5);
  const KrausEstimate est = fit_kraus(data, known_spam(ideal_spam(2)));
  const CMatrix plus = 0.5 * CMatrix::Ones(2, 2);
  const CMatrix out = kraus_apply(est.fits[1].kraus, tensor(plus, plus));
  // Negativity of the partial transpose on qubit B.
  CMatrix pt(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int e = 0; e < 2; ++e) pt(2 * a + b, 2 * c + e) = out(2 * a + e, 2 * c + b);
  CHECK(min_eigenvalue(pt) < -0.1);
}
