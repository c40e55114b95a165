#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lindtomo/error.hpp"
#include "lindtomo/synthdata.hpp"
#include "support/oracles.hpp"

using namespace lindtomo;

namespace {

LindbladModel damped_qubit() {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 0.15;
  h(1, 1) = -0.15;
  return lindblad_from_jumps(h, {{0.05, 0.02}, {matrix_unit(2, 0, 1), oracle::pauli('Z') / std::sqrt(2.0)}});
}

// The same dissipation on qubit A of a pair, with B idle.
LindbladModel damped_on_a() {
  const CMatrix i2 = CMatrix::Identity(2, 2);
  const LindbladModel one = damped_qubit();
  const JumpDecomposition j = jumps_from_lindblad(one);
  JumpDecomposition two;
  for (std::size_t k = 0; k < j.rates.size(); ++k) {
    two.rates.push_back(2.0 * j.rates[k]);  // normalization of L (x) I
    two.jump_ops.push_back(tensor(j.jump_ops[k], i2) / std::sqrt(2.0));
  }
  return lindblad_from_jumps(tensor(one.hamiltonian(), i2), two);
}

std::vector<double> grid() { return parse_time_grid("lin:0:80:5"); }

}  // namespace

TEST_CASE("sequence enumeration") {
  CHECK(enumerate_sequences(1).size() == 18);
  CHECK(enumerate_sequences(2).size() == 324);
  const auto s = enumerate_sequences(1);
  CHECK(s.front().first.str() == "0");
  CHECK(s.front().second.str() == "z");
}

TEST_CASE("generated records cover every sequence and time in order") {
  const Dataset d = generate(damped_qubit(), ideal_spam(1), grid(), 500, 3);
  CHECK_NOTHROW(d.validate());
  CHECK(d.records.size() == 18 * 5);
  const auto seqs = enumerate_sequences(1);
  for (std::size_t t = 0; t < d.times_us.size(); ++t) {
    const auto at = d.at_time(d.times_us[t]);
    REQUIRE(at.size() == seqs.size());
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      CHECK(at[k]->prep == seqs[k].first);
      CHECK(at[k]->basis == seqs[k].second);
      CHECK(std::accumulate(at[k]->counts.begin(), at[k]->counts.end(), std::int64_t{0}) == 500);
    }
  }
  const Dataset d2 = generate(damped_on_a(), ideal_spam(2), grid(), 100, 3);
  CHECK(d2.records.size() == 324 * 5);
  CHECK(d2.records.front().counts.size() == 4);
}

TEST_CASE("preparation of a thermal state") {
  for (double a : {1.0, 0.9, 0.7}) {
    const DensityMatrix rho0 = DensityMatrix::thermal(a);
    const CMatrix plus = ideal_prep_state(PrepLabel::parse("+"), rho0).matrix();
    CHECK(std::abs(plus(0, 1) - cplx((2 * a - 1) / 2, 0.0)) < 1e-12);
    CHECK(std::abs(plus(0, 0).real() - 0.5) < 1e-12);
    const CMatrix one = ideal_prep_state(PrepLabel::parse("1"), rho0).matrix();
    CHECK(std::abs(one(1, 1).real() - a) < 1e-12);
  }
}

TEST_CASE("frequencies converge to the probabilities") {
  const std::vector<double> probs{0.1, 0.25, 0.6, 0.05};
  const std::int64_t n = 1000000;
  const auto c = sample_counts(probs, n, 42, 7);
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double sigma = std::sqrt(probs[k] * (1 - probs[k]) / n);
    CHECK(std::abs(static_cast<double>(c[k]) / n - probs[k]) < 5 * sigma);
  }
  // Degenerate distributions are sampled exactly.
  CHECK(sample_counts({0.0, 1.0}, 77, 1, 1) == std::vector<std::int64_t>{0, 77});
}

TEST_CASE("sampling is deterministic and order independent") {
  const std::vector<double> p{0.3, 0.7};
  const auto a = sample_counts(p, 1000, 5, 10);
  (void)sample_counts(p, 1000, 5, 11);
  CHECK(sample_counts(p, 1000, 5, 10) == a);
  const Dataset d1 = generate(damped_qubit(), ideal_spam(1), grid(), 1000, 9);
  const Dataset d2 = generate(damped_qubit(), ideal_spam(1), grid(), 1000, 9);
  const Dataset d3 = generate(damped_qubit(), ideal_spam(1), grid(), 1000, 10);
  bool same = true, differ = false;
  for (std::size_t r = 0; r < d1.records.size(); ++r) {
    same = same && d1.records[r].counts == d2.records[r].counts;
    differ = differ || d1.records[r].counts != d3.records[r].counts;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("exclusion filters") {
  const Dataset d = generate(damped_qubit(), ideal_spam(1), grid(), 100, 1);
  const double t1 = d.times_us[1];
  const Dataset one = exclude(d, {parse_filter("prep=-i,basis=y")});
  for (double t : d.times_us) CHECK(one.sequences_at(t) == 17);
  const Dataset three = exclude(d, {parse_filter("prep=-i")});
  for (double t : d.times_us) CHECK(three.sequences_at(t) == 15);
  const Dataset at_t = exclude(d, {parse_filter("prep=-i,basis=y,time=" + std::to_string(t1))});
  CHECK(at_t.sequences_at(t1) == 17);
  CHECK(at_t.sequences_at(0.0) == 18);
  const Dataset two = exclude(d, {parse_filter("basis=x"), parse_filter("basis=y")});
  CHECK(two.sequences_at(0.0) == 6);
  CHECK_THROWS_AS(parse_filter("colour=red"), SchemaError);
}

TEST_CASE("two-qubit marginals agree with the single-qubit model") {
  const std::int64_t shots = 2000;
  const Dataset d2 = generate(damped_on_a(), ideal_spam(2), grid(), shots, 21);
  const Dataset m = marginal_dataset(d2, 0, PrepLabel::parse("0"), BasisLabel::parse("z"));
  CHECK(m.records.size() == 18 * 5);
  const LindbladModel one = damped_qubit();
  const SpamTruth spam = ideal_spam(1);
  double chi2 = 0.0;
  int dof = 0;
  for (const auto& r : m.records) {
    const DensityMatrix rho = evolve(one, ideal_prep_state(r.prep, spam.rho0), r.time_us);
    const double p0 = outcome_probabilities(rho.matrix(), r.basis, spam.povm)[0];
    const double var = shots * p0 * (1 - p0);
    if (var < 1e-9) {
      CHECK(std::abs(static_cast<double>(r.counts[0]) - shots * p0) < 0.5);
      continue;
    }
    const double dev = static_cast<double>(r.counts[0]) - shots * p0;
    chi2 += dev * dev / var;
    ++dof;
  }
  CHECK(chi2 < dof + 5 * std::sqrt(2.0 * dof));
}

TEST_CASE("time grids") {
  const auto lin = parse_time_grid("lin:0:80:20");
  CHECK(lin.size() == 20);
  CHECK(lin.front() == 0.0);
  CHECK(std::abs(lin.back() - 80.0) < 1e-12);
  CHECK(std::abs(lin[1] - 80.0 / 19) < 1e-12);
  const auto lg = parse_time_grid("log:1:100:4");
  CHECK(lg.size() == 4);
  CHECK(lg[0] == 0.0);
  CHECK(std::abs(lg[3] - 100.0) < 1e-9);
  CHECK(parse_time_grid("0,2.5,7") == std::vector<double>{0.0, 2.5, 7.0});
  CHECK_THROWS_AS(parse_time_grid("lin:0:80"), SchemaError);
}

TEST_CASE("dataset validation") {
  Dataset d = generate(damped_qubit(), ideal_spam(1), grid(), 100, 1);
  d.records[3].counts[0] += 1;
  CHECK_THROWS_AS(d.validate(), SchemaError);
  CHECK_THROWS_AS(generate(damped_qubit(), ideal_spam(1), {1.0, 2.0}, 100, 1), SchemaError);
  CHECK_THROWS_AS(generate(damped_qubit(), ideal_spam(2), grid(), 100, 1), DimensionError);
}

TEST_CASE("generation from explicit channels") {
  std::vector<KrausSet> channels;
  for (double t : grid()) channels.push_back(KrausSet{2, {CMatrix::Identity(2, 2)}, t});
  const Dataset d = generate_from_channels(channels, ideal_spam(1), 300, 4);
  for (const auto& r : d.records) {
    if (r.prep.str() == "0" && r.basis.str() == "z") CHECK(r.counts[0] == 300);
    if (r.prep.str() == "1" && r.basis.str() == "z") CHECK(r.counts[1] == 300);
  }
}

TEST_CASE("ideal preparations and the zero generator") {
  const DensityMatrix g = ideal_spam(1).rho0;
  CHECK(max_abs(ideal_prep_state(PrepLabel::parse("0"), g).matrix() - matrix_unit(2, 0, 0)) < 1e-15);
  CHECK(max_abs(ideal_prep_state(PrepLabel::parse("1"), g).matrix() - matrix_unit(2, 1, 1)) < 1e-15);
  const Dataset d = generate(LindbladModel::zero(2), ideal_spam(1), grid(), kDefaultShots, 6);
  CHECK(kDefaultShots == 1000);
  for (const auto& r : d.records) {
    if (r.prep.str() == "0" && r.basis.str() == "z") CHECK(r.counts[0] == kDefaultShots);
  }
}

TEST_CASE("total shots and the empty filter list") {
  const Dataset d = generate(damped_on_a(), ideal_spam(2), grid(), 50, 2);
  std::int64_t total = 0;
  for (const auto& r : d.records) total += std::accumulate(r.counts.begin(), r.counts.end(), std::int64_t{0});
  CHECK(total == 50 * 324 * 5);
  const Dataset same = exclude(d, {});
  REQUIRE(same.records.size() == d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) CHECK(same.records[i].counts == d.records[i].counts);
}
