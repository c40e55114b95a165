#include "lindtomo/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include "lindtomo/error.hpp"

namespace lindtomo::io {

namespace {

const Json& member(const Json& j, const char* key) {
  if (!j.is_object()) throw SchemaError(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return member(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("field '") + key + "': " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json matrices(const std::vector<CMatrix>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(to_json(m));
  return out;
}

std::vector<CMatrix> matrices_from(const Json& j) {
  if (!j.is_array()) throw SchemaError("expected an array of matrices");
  std::vector<CMatrix> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

Json vector_json(const RVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

RVector vector_from(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  RVector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

Json jumps_json(const JumpDecomposition& jumps) {
  Json out = Json::array();
  for (std::size_t k = 0; k < jumps.rates.size(); ++k) {
    out.push_back({{"rate_mhz", jumps.rates[k]}, {"operator", to_json(jumps.jump_ops[k])}});
  }
  return out;
}

JumpDecomposition jumps_from(const Json& j) {
  JumpDecomposition out;
  for (const auto& e : j) {
    out.rates.push_back(get<double>(e, "rate_mhz"));
    out.jump_ops.push_back(matrix_from_json(member(e, "operator")));
  }
  return out;
}

template <typename F>
auto decode(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string config_hash(const Json& config) {
  const std::size_t h = std::hash<std::string>{}(config.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016zx", h);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw SchemaError("matrix must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw SchemaError("matrix rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        throw SchemaError("matrix entries must be [re, im] pairs");
      }
      m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

Json to_json(const Manifest& m) {
  return {{"command", m.command},
          {"inputs", m.inputs},
          {"config_hash", m.config_hash},
          {"seed", m.seed},
          {"version", m.version},
          {"timestamp", {{"utc", m.timestamp}, {"wall_time_s", m.wall_time_s}}}};
}

Manifest manifest_from_json(const Json& j) {
  Manifest m;
  m.command = get<std::string>(j, "command");
  m.inputs = get<std::vector<std::string>>(j, "inputs");
  m.config_hash = get<std::string>(j, "config_hash");
  m.seed = get<std::uint64_t>(j, "seed");
  m.version = get<std::string>(j, "version");
  const Json& ts = member(j, "timestamp");
  m.timestamp = get<std::string>(ts, "utc");
  m.wall_time_s = get<double>(ts, "wall_time_s");
  return m;
}

Json to_json(const Dataset& d) {
  Json records = Json::array();
  for (const auto& r : d.records) {
    Json counts = Json::object();
    for (std::size_t o = 0; o < r.counts.size(); ++o) {
      counts[outcome_label(static_cast<int>(o), d.n_qubits)] = r.counts[o];
    }
    records.push_back({{"prep", r.prep.str()},
                       {"basis", r.basis.str()},
                       {"time_us", r.time_us},
                       {"shots", r.shots},
                       {"counts", std::move(counts)}});
  }
  return {{"n_qubits", d.n_qubits},
          {"times_us", d.times_us},
          {"shots_nominal", d.shots_nominal},
          {"records", std::move(records)}};
}

Dataset dataset_from_json(const Json& j) {
  Dataset d;
  d.n_qubits = get<int>(j, "n_qubits");
  if (d.n_qubits != 1 && d.n_qubits != 2) throw SchemaError("n_qubits must be 1 or 2");
  d.times_us = get<std::vector<double>>(j, "times_us");
  d.shots_nominal = get<std::int64_t>(j, "shots_nominal");
  const int n_out = count_outcomes(d.n_qubits);
  for (const auto& r : member(j, "records")) {
    SequenceRecord rec;
    rec.prep = PrepLabel::parse(get<std::string>(r, "prep"));
    rec.basis = BasisLabel::parse(get<std::string>(r, "basis"));
    rec.time_us = get<double>(r, "time_us");
    rec.shots = get<std::int64_t>(r, "shots");
    rec.counts.assign(static_cast<std::size_t>(n_out), 0);
    const Json& counts = member(r, "counts");
    if (!counts.is_object()) throw SchemaError("counts must be keyed by outcome bitstring");
    for (const auto& [key, value] : counts.items()) {
      const int o = parse_outcome(key, d.n_qubits);
      rec.counts[static_cast<std::size_t>(o)] =
          decode("counts", [&] { return value.get<std::int64_t>(); });
    }
    d.records.push_back(std::move(rec));
  }
  d.validate();
  return d;
}

Json to_json(const LindbladModel& m) {
  return {{"dim", m.dim()},
          {"hamiltonian", to_json(m.hamiltonian())},
          {"lindblad_matrix", to_json(m.lindblad_matrix())},
          {"basis", "pauli-tensor"}};
}

LindbladModel model_from_json(const Json& j) {
  if (get<std::string>(j, "basis") != "pauli-tensor") throw SchemaError("unsupported basis");
  const auto dim = get<Eigen::Index>(j, "dim");
  LindbladModel m = LindbladModel::from(matrix_from_json(member(j, "hamiltonian")),
                                        matrix_from_json(member(j, "lindblad_matrix")));
  if (m.dim() != dim) throw SchemaError("dim does not match the Hamiltonian");
  return m;
}

Json to_json(const FitReport& r) {
  Json starts = Json::array();
  for (const auto& s : r.starts) {
    starts.push_back({{"loglike", s.loglike}, {"iterations", s.iterations}, {"converged", s.converged}});
  }
  return {{"best_loglike", r.best_loglike}, {"starts_tried", r.starts_tried},
          {"best_start", r.best_start},     {"converged", r.converged},
          {"iterations", r.iterations},     {"params", vector_json(r.params)},
          {"starts", std::move(starts)}};
}

FitReport fit_report_from_json(const Json& j) {
  return decode("fit report", [&] {
    FitReport r;
    r.best_loglike = get<double>(j, "best_loglike");
    r.starts_tried = get<int>(j, "starts_tried");
    r.best_start = get<int>(j, "best_start");
    r.converged = get<bool>(j, "converged");
    r.iterations = get<int>(j, "iterations");
    r.params = vector_from(member(j, "params"));
    for (const auto& s : member(j, "starts")) {
      r.starts.push_back({get<double>(s, "loglike"), get<int>(s, "iterations"),
                          get<bool>(s, "converged")});
    }
    return r;
  });
}

Json to_json(const SpamEstimate& s) {
  return {{"n_qubits", s.n_qubits()},
          {"rho0", to_json(s.rho0.matrix())},
          {"povm", matrices(s.povm.elements())},
          {"loglike", s.loglike},
          {"fit", to_json(s.report)}};
}

SpamEstimate spam_from_json(const Json& j) {
  SpamEstimate s{DensityMatrix::from(matrix_from_json(member(j, "rho0"))),
                 Povm::from(matrices_from(member(j, "povm"))), get<double>(j, "loglike"), {}};
  if (s.povm.dim() != s.rho0.dim()) throw SchemaError("rho0 and POVM dimensions differ");
  if (j.contains("fit")) s.report = fit_report_from_json(j["fit"]);
  return s;
}

Json to_json(const KrausEstimate& k) {
  Json fits = Json::array();
  for (const auto& f : k.fits) {
    fits.push_back({{"time_us", f.time_us},
                    {"ok", f.ok},
                    {"message", f.message},
                    {"loglike", f.loglike},
                    {"kraus", matrices(f.kraus.operators)},
                    {"choi", to_json(choi_of(f.kraus))},
                    {"fit", to_json(f.report)}});
  }
  return {{"n_qubits", k.n_qubits}, {"fits", std::move(fits)}};
}

KrausEstimate kraus_from_json(const Json& j) {
  KrausEstimate k;
  k.n_qubits = get<int>(j, "n_qubits");
  for (const auto& f : member(j, "fits")) {
    KrausFitTime t;
    t.time_us = get<double>(f, "time_us");
    t.ok = get<bool>(f, "ok");
    t.message = get<std::string>(f, "message");
    t.loglike = get<double>(f, "loglike");
    t.kraus.operators = matrices_from(member(f, "kraus"));
    t.kraus.dim = t.kraus.operators.empty() ? 0 : t.kraus.operators.front().rows();
    t.kraus.time_us = t.time_us;
    if (f.contains("fit")) t.report = fit_report_from_json(f["fit"]);
    k.fits.push_back(std::move(t));
  }
  return k;
}

Json to_json(const LindbladEstimate& e) {
  Json deviance = Json::array();
  for (const auto& s : e.deviance) {
    deviance.push_back({{"prep", s.prep.str()},
                        {"basis", s.basis.str()},
                        {"deviance", s.deviance},
                        {"dof", s.dof}});
  }
  Json restricted = Json::array();
  if (e.mode == LindbladMode::restricted) {
    const RestrictedJumps rj = restricted_jumps(qubits_for_dim(e.model.dim()));
    for (std::size_t k = 0; k < e.restricted_rates.size(); ++k) {
      restricted.push_back({{"name", rj.names[k]}, {"rate_mhz", e.restricted_rates[k]}});
    }
  }
  return {{"mode", std::string(to_string(e.mode))},
          {"model", to_json(e.model)},
          {"jumps", jumps_json(e.jumps)},
          {"restricted_rates", std::move(restricted)},
          {"loglike", e.loglike},
          {"mean_reduced_deviance", e.mean_reduced_deviance},
          {"deviance", std::move(deviance)},
          {"fit", to_json(e.report)}};
}

LindbladEstimate lindblad_from_json(const Json& j) {
  LindbladEstimate e;
  e.mode = parse_mode(get<std::string>(j, "mode"));
  e.model = model_from_json(member(j, "model"));
  e.jumps = jumps_from(member(j, "jumps"));
  for (const auto& r : member(j, "restricted_rates")) e.restricted_rates.push_back(get<double>(r, "rate_mhz"));
  e.loglike = get<double>(j, "loglike");
  e.mean_reduced_deviance = get<double>(j, "mean_reduced_deviance");
  for (const auto& s : member(j, "deviance")) {
    e.deviance.push_back({PrepLabel::parse(get<std::string>(s, "prep")),
                          BasisLabel::parse(get<std::string>(s, "basis")), get<double>(s, "deviance"),
                          get<int>(s, "dof")});
  }
  if (j.contains("fit")) e.report = fit_report_from_json(j["fit"]);
  return e;
}

Json to_json(const MarkovReport& r) {
  Json series = Json::array();
  for (const auto& p : r.series) series.push_back({{"time_us", p.time_us}, {"distance", p.distance}});
  Json increments = Json::array();
  for (const auto& i : r.increments) {
    increments.push_back({{"t_from", i.t_from}, {"t_to", i.t_to}, {"delta", i.delta}});
  }
  Json out = {{"n_markov", r.n_markov},
              {"best_pair", {r.best_pair.first.str(), r.best_pair.second.str()}},
              {"series", std::move(series)},
              {"increments", std::move(increments)}};
  out["noise_floor"] = r.noise_floor ? Json(*r.noise_floor) : Json(nullptr);
  return out;
}

MarkovReport markov_from_json(const Json& j) {
  MarkovReport r;
  r.n_markov = get<double>(j, "n_markov");
  const auto pair = get<std::vector<std::string>>(j, "best_pair");
  if (pair.size() != 2) throw SchemaError("best_pair must hold two labels");
  r.best_pair = {PrepLabel::parse(pair[0]), PrepLabel::parse(pair[1])};
  for (const auto& p : member(j, "series")) {
    r.series.push_back({get<double>(p, "time_us"), get<double>(p, "distance")});
  }
  for (const auto& i : member(j, "increments")) {
    r.increments.push_back({get<double>(i, "t_from"), get<double>(i, "t_to"), get<double>(i, "delta")});
  }
  const Json& floor = member(j, "noise_floor");
  if (!floor.is_null()) r.noise_floor = decode("noise_floor", [&] { return floor.get<double>(); });
  return r;
}

Json to_json(const CompareReport& r) {
  const auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json delta = Json::array();
  for (const auto& p : r.delta) delta.push_back({{"time_us", p.time_us}, {"delta", p.delta}});
  return {{"delta", std::move(delta)},
          {"loglike_free", r.loglike_free},
          {"loglike_restricted", r.loglike_restricted},
          {"steady_distance_free", opt(r.steady_distance_free)},
          {"steady_distance_restricted", opt(r.steady_distance_restricted)},
          {"zz_free_mhz", opt(r.zz_free_mhz)},
          {"zz_restricted_mhz", opt(r.zz_restricted_mhz)}};
}

CompareReport compare_from_json(const Json& j) {
  const auto opt = [&](const char* key) -> std::optional<double> {
    const Json& v = member(j, key);
    if (v.is_null()) return std::nullopt;
    return get<double>(j, key);
  };
  CompareReport r;
  for (const auto& p : member(j, "delta")) r.delta.push_back({get<double>(p, "time_us"), get<double>(p, "delta")});
  r.loglike_free = get<double>(j, "loglike_free");
  r.loglike_restricted = get<double>(j, "loglike_restricted");
  r.steady_distance_free = opt("steady_distance_free");
  r.steady_distance_restricted = opt("steady_distance_restricted");
  r.zz_free_mhz = opt("zz_free_mhz");
  r.zz_restricted_mhz = opt("zz_restricted_mhz");
  return r;
}

OptimizerConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("config must be an object");
  OptimizerConfig c;
  for (const auto& [key, value] : j.items()) {
    decode(key.c_str(), [&] {
      if (key == "gtol") c.gtol = value.get<double>();
      else if (key == "ftol") c.ftol = value.get<double>();
      else if (key == "max_iters") c.max_iters = value.get<int>();
      else if (key == "n_starts") c.n_starts = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "barrier_init") c.barrier_init = value.get<double>();
      else if (key == "barrier_growth") c.barrier_growth = value.get<double>();
      else if (key != "version") throw SchemaError("unknown config key '" + key + "'");
      return 0;
    });
  }
  if (c.n_starts < 1 || c.max_iters < 1 || !(c.gtol > 0.0) || !(c.ftol >= 0.0)) {
    throw SchemaError("config values out of range");
  }
  return c;
}

Json to_json(const OptimizerConfig& c) {
  return {{"gtol", c.gtol},
          {"ftol", c.ftol},
          {"max_iters", c.max_iters},
          {"n_starts", c.n_starts},
          {"seed", c.seed},
          {"barrier_init", c.barrier_init},
          {"barrier_growth", c.barrier_growth}};
}

Json make_document(std::string_view kind, const Json& body, const Manifest& manifest) {
  Json doc = {{"version", kSchemaVersion}, {"kind", std::string(kind)}, {"manifest", to_json(manifest)}};
  for (const auto& [key, value] : body.items()) doc[key] = value;
  return doc;
}

const Json& expect_document(const Json& doc, std::string_view kind) {
  const int version = get<int>(doc, "version");
  if (version != kSchemaVersion) {
    throw SchemaError("unsupported schema version " + std::to_string(version));
  }
  const auto k = get<std::string>(doc, "kind");
  if (k != kind) throw SchemaError("expected a '" + std::string(kind) + "' document, got '" + k + "'");
  return doc;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw DependencyError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& path) {
  return dataset_from_json(expect_document(read_json(path), "dataset"));
}
LindbladModel read_model(const std::filesystem::path& path) {
  return model_from_json(expect_document(read_json(path), "model"));
}
SpamEstimate read_spam(const std::filesystem::path& path) {
  return spam_from_json(expect_document(read_json(path), "spam"));
}
KrausEstimate read_kraus(const std::filesystem::path& path) {
  return kraus_from_json(expect_document(read_json(path), "kraus"));
}
LindbladEstimate read_lindblad(const std::filesystem::path& path) {
  return lindblad_from_json(expect_document(read_json(path), "lindblad"));
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw DependencyError("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty CSV");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw SchemaError(path.string() + ": bad CSV value '" + cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() != t.header.size()) throw SchemaError(path.string() + ": ragged CSV row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace lindtomo::io
