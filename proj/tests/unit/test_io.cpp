#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "lindtomo/io.hpp"
#include "support/oracles.hpp"

using namespace lindtomo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lindtomo_test_io";
  fs::create_directories(dir);
  return dir / name;
}

io::Manifest manifest() {
  io::Manifest m;
  m.command = "test";
  m.inputs = {"a.json"};
  m.config_hash = "0";
  m.seed = 7;
  m.timestamp = "2020-01-01T00:00:00Z";
  return m;
}

// Dump through text so the round trip includes number formatting.
io::Json through_text(const io::Json& j) { return io::Json::parse(j.dump()); }

FitReport sample_report() {
  FitReport r;
  r.best_loglike = -123.5;
  r.params = RVector::LinSpaced(4, -1.0, 1.0);
  r.starts_tried = 2;
  r.best_start = 1;
  r.converged = true;
  r.iterations = 17;
  r.starts = {{-130.0, 9, false}, {-123.5, 17, true}};
  return r;
}

}  // namespace

TEST_CASE("complex matrices round-trip bit for bit") {
  std::mt19937_64 rng(1);
  const CMatrix m = oracle::random_matrix(rng, 4);
  const CMatrix back = io::matrix_from_json(through_text(io::to_json(m)));
  CHECK(max_abs(back - m) == 0.0);
  CHECK_THROWS_AS(io::matrix_from_json(io::Json::parse("[[1, 2], [3]]")), SchemaError);
}

TEST_CASE("datasets") {
  std::mt19937_64 rng(2);
  const Dataset d = generate(oracle::random_model(rng, 4, 0.5, 0.1), ideal_spam(2), {0.0, 1.5}, 100, 3);
  const Dataset back = io::dataset_from_json(through_text(io::to_json(d)));
  CHECK(back.n_qubits == 2);
  CHECK(back.times_us == d.times_us);
  CHECK(back.shots_nominal == 100);
  REQUIRE(back.records.size() == d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    CHECK(back.records[i].prep == d.records[i].prep);
    CHECK(back.records[i].basis == d.records[i].basis);
    CHECK(back.records[i].counts == d.records[i].counts);
  }
  io::Json broken = io::to_json(d);
  broken["records"][0]["shots"] = 99;
  CHECK_THROWS_AS(io::dataset_from_json(broken), SchemaError);
}

TEST_CASE("models and estimates") {
  std::mt19937_64 rng(3);
  const LindbladModel m = oracle::random_model(rng, 2, 0.5, 0.1);
  const LindbladModel mb = io::model_from_json(through_text(io::to_json(m)));
  CHECK(max_abs(mb.hamiltonian() - m.hamiltonian()) == 0.0);
  CHECK(max_abs(mb.lindblad_matrix() - m.lindblad_matrix()) == 0.0);

  const SpamEstimate s{DensityMatrix::thermal(0.9), Povm::projective(1), -10.0, sample_report()};
  const SpamEstimate sb = io::spam_from_json(through_text(io::to_json(s)));
  CHECK(max_abs(sb.rho0.matrix() - s.rho0.matrix()) == 0.0);
  CHECK(sb.povm.elements().size() == 2);
  CHECK(sb.loglike == -10.0);
  CHECK(sb.report.iterations == 17);
  CHECK(sb.report.starts.size() == 2);
  CHECK(sb.report.params == s.report.params);

  KrausEstimate k;
  k.n_qubits = 1;
  k.fits.push_back({0.0, KrausSet{2, {CMatrix::Identity(2, 2)}, 0.0}, -1.0, sample_report(), true, ""});
  k.fits.push_back({5.0, KrausSet{2, oracle::random_kraus(rng, 2, 2), 5.0}, -2.0, sample_report(), false,
                    "no start converged"});
  const KrausEstimate kb = io::kraus_from_json(through_text(io::to_json(k)));
  REQUIRE(kb.fits.size() == 2);
  CHECK_FALSE(kb.ok());
  CHECK(kb.fits[1].message == "no start converged");
  CHECK(kb.fits[1].time_us == 5.0);
  CHECK(max_abs(choi_of(kb.fits[1].kraus) - choi_of(k.fits[1].kraus)) < 1e-15);

  LindbladEstimate e;
  e.model = m;
  e.jumps = jumps_from_lindblad(m);
  e.loglike = -55.0;
  e.mode = LindbladMode::restricted;
  e.restricted_rates = {0.1, 0.2};
  e.mean_reduced_deviance = 1.1;
  e.deviance = {{PrepLabel::parse("+"), BasisLabel::parse("x"), 21.0, 19}};
  e.report = sample_report();
  const LindbladEstimate eb = io::lindblad_from_json(through_text(io::to_json(e)));
  CHECK(eb.mode == LindbladMode::restricted);
  CHECK(eb.restricted_rates == e.restricted_rates);
  CHECK(max_abs(eb.model.lindblad_matrix() - m.lindblad_matrix()) == 0.0);
  CHECK(eb.jumps.rates == e.jumps.rates);
  REQUIRE(eb.deviance.size() == 1);
  CHECK(eb.deviance[0].dof == 19);
  CHECK(eb.mean_reduced_deviance == 1.1);
}

TEST_CASE("reports") {
  MarkovReport r;
  r.n_markov = 0.25;
  r.best_pair = {PrepLabel::parse("+"), PrepLabel::parse("-")};
  r.series = {{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.75}};
  r.increments = {{0.0, 1.0, -0.5}, {1.0, 2.0, 0.25}};
  const MarkovReport rb = io::markov_from_json(through_text(io::to_json(r)));
  CHECK(rb.n_markov == 0.25);
  CHECK(rb.best_pair.second.str() == "-");
  CHECK(rb.series.size() == 3);
  CHECK_FALSE(rb.noise_floor.has_value());
  r.noise_floor = 0.01;
  CHECK(*io::markov_from_json(io::to_json(r)).noise_floor == 0.01);

  CompareReport c;
  c.delta = {{0.0, 0.0}, {80.0, 0.4}};
  c.loglike_free = -1.0;
  c.loglike_restricted = -2.0;
  c.steady_distance_free = 0.06;
  const CompareReport cb = io::compare_from_json(through_text(io::to_json(c)));
  CHECK(cb.delta[1].delta == 0.4);
  CHECK(*cb.steady_distance_free == 0.06);
  CHECK_FALSE(cb.steady_distance_restricted.has_value());
  CHECK_FALSE(cb.zz_free_mhz.has_value());
}

TEST_CASE("optimizer configuration") {
  OptimizerConfig c;
  c.n_starts = 9;
  c.seed = 4;
  c.gtol = 1e-5;
  const OptimizerConfig back = io::config_from_json(through_text(io::to_json(c)));
  CHECK(back.n_starts == 9);
  CHECK(back.seed == 4);
  CHECK(back.gtol == 1e-5);
  CHECK(io::config_from_json(io::Json::parse(R"({"version": 1, "max_iters": 10})")).max_iters == 10);
  CHECK_THROWS_AS(io::config_from_json(io::Json::parse(R"({"tolerance": 1})")), SchemaError);
  CHECK(io::config_hash(io::to_json(c)) == io::config_hash(io::to_json(back)));
  CHECK(io::config_hash(io::to_json(c)) != io::config_hash(io::to_json(OptimizerConfig{})));
}

TEST_CASE("documents") {
  const io::Json body = {{"answer", 42}};
  const io::Json doc = io::make_document("thing", body, manifest());
  CHECK(doc["version"] == io::kSchemaVersion);
  CHECK(doc["kind"] == "thing");
  CHECK(doc.begin().key() == "version");
  CHECK(io::expect_document(doc, "thing")["answer"] == 42);
  CHECK_THROWS_AS(io::expect_document(doc, "other"), SchemaError);
  io::Json future = doc;
  future["version"] = io::kSchemaVersion + 1;
  CHECK_THROWS_AS(io::expect_document(future, "thing"), SchemaError);

  const io::Manifest mb = io::manifest_from_json(doc["manifest"]);
  CHECK(mb.seed == 7);
  CHECK(mb.timestamp == "2020-01-01T00:00:00Z");
  CHECK(mb.inputs == std::vector<std::string>{"a.json"});

  const fs::path p = scratch("doc.json");
  io::write_json(p, doc);
  CHECK(io::read_json(p) == doc);
  CHECK_THROWS_AS(io::read_json(scratch("missing.json")), DependencyError);
  std::ofstream(scratch("bad.json")) << "{ not json";
  CHECK_THROWS_AS(io::read_json(scratch("bad.json")), SchemaError);

  const fs::path mp = scratch("model.json");
  io::write_json(mp, io::make_document("model", io::to_json(LindbladModel::zero(2)), manifest()));
  CHECK(io::read_model(mp).dim() == 2);
  CHECK_THROWS_AS(io::read_dataset(mp), SchemaError);
}

TEST_CASE("CSV tables keep every digit") {
  io::CsvTable t;
  t.header = {"time_us", "value"};
  t.rows = {{0.0, 0.1}, {4.2105263157894735, 1.0 / 3.0}, {80.0, std::numeric_limits<double>::quiet_NaN()}};
  const fs::path p = scratch("table.csv");
  io::write_csv(p, t);
  const io::CsvTable back = io::read_csv(p);
  CHECK(back.header == t.header);
  REQUIRE(back.rows.size() == 3);
  CHECK(back.rows[1][0] == t.rows[1][0]);
  CHECK(back.rows[1][1] == t.rows[1][1]);
  CHECK(std::isnan(back.rows[2][1]));
}
