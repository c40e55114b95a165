// lindtomo: simulate tomography datasets, fit SPAM / Kraus / Lindblad
// estimates and analyze them.
//
// Exit codes: 0 ok, 2 schema or usage error, 3 invalid model, 4 missing
// dependency, 5 optimizer failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lindtomo/analysis.hpp"
#include "lindtomo/error.hpp"
#include "lindtomo/io.hpp"
#include "lindtomo/kraus_fit.hpp"
#include "lindtomo/lindblad_fit.hpp"
#include "lindtomo/markovianity.hpp"
#include "lindtomo/parallel.hpp"
#include "lindtomo/spam_fit.hpp"
#include "lindtomo/synthdata.hpp"

namespace fs = std::filesystem;
using namespace lindtomo;
using io::Json;

namespace {

using Clock = std::chrono::steady_clock;

struct SimulateArgs {
  std::string model;
  std::string spam;
  int qubits = 0;
  std::string times = "lin:0:80:20";
  std::int64_t shots = kDefaultShots;
  std::uint64_t seed = 0;
  std::string out;
};

struct FitArgs {
  std::string data;
  std::string stage;
  std::string mode = "free";
  std::vector<std::string> exclude;
  std::string config;
  std::string spam;
  std::optional<std::uint64_t> seed;
  bool warm_start = false;
  std::string out;
};

struct AnalyzeArgs {
  std::string kind;
  std::string kraus;
  std::string spam;
  std::string lindblad;
  std::string model;
  std::string free;
  std::string restricted;
  std::string times = "lin:0:80:20";
  bool use_spam_preps = false;
  int noise_resamples = 0;
  std::uint64_t seed = 0;
  std::optional<double> g, eta_a, eta_b, delta;
  std::string out;
};

fs::path csv_path(const fs::path& out) {
  fs::path p = out;
  return p.replace_extension(".csv");
}

io::Manifest manifest(const std::string& command, std::vector<std::string> inputs, const Json& config,
                      std::uint64_t seed, Clock::time_point start) {
  io::Manifest m;
  m.command = command;
  m.inputs = std::move(inputs);
  m.config_hash = io::config_hash(config);
  m.seed = seed;
  m.timestamp = io::utc_timestamp();
  m.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return m;
}

void require(const std::string& value, const char* what) {
  if (value.empty()) throw DependencyError(std::string("missing required input ") + what);
}

int run_simulate(const SimulateArgs& a) {
  const auto start = Clock::now();
  const LindbladModel model = io::read_model(a.model);
  const int n = qubits_for_dim(model.dim());
  if (a.qubits != 0 && a.qubits != n) {
    throw ModelError("--qubits " + std::to_string(a.qubits) + " does not match the model dimension");
  }
  SpamTruth spam = ideal_spam(n);
  if (!a.spam.empty()) {
    const SpamEstimate s = io::read_spam(a.spam);
    if (s.rho0.dim() != model.dim()) throw ModelError("SPAM and model dimensions differ");
    spam = {s.rho0, s.povm};
  }
  const auto times = parse_time_grid(a.times);
  const Dataset data = generate(model, spam, times, a.shots, a.seed);
  const Json config = {{"times", a.times}, {"shots", a.shots}, {"qubits", n}};
  std::vector<std::string> inputs{a.model};
  if (!a.spam.empty()) inputs.push_back(a.spam);
  io::write_json(a.out, io::make_document("dataset", io::to_json(data),
                                          manifest("simulate", inputs, config, a.seed, start)));
  return 0;
}

int run_fit(const FitArgs& a) {
  const auto start = Clock::now();
  Dataset data = io::read_dataset(a.data);
  std::vector<ExclusionFilter> filters;
  for (const auto& f : a.exclude) filters.push_back(parse_filter(f));
  if (!filters.empty()) data = exclude(data, filters);

  OptimizerConfig config;
  if (!a.config.empty()) config = io::config_from_json(io::read_json(a.config));
  if (a.seed) config.seed = *a.seed;
  Json config_doc = io::to_json(config);
  config_doc["stage"] = a.stage;
  config_doc["exclude"] = a.exclude;
  std::vector<std::string> inputs{a.data};
  if (!a.config.empty()) inputs.push_back(a.config);

  if (a.stage == "spam") {
    const SpamEstimate est = fit_spam(data, config);
    io::write_json(a.out, io::make_document("spam", io::to_json(est),
                                            manifest("fit", inputs, config_doc, config.seed, start)));
    return 0;
  }

  require(a.spam, "--spam (SPAM estimate for this stage)");
  const SpamEstimate spam = io::read_spam(a.spam);
  inputs.push_back(a.spam);
  if (spam.n_qubits() != data.n_qubits) throw ModelError("SPAM estimate and dataset qubit counts differ");

  if (a.stage == "kraus") {
    config_doc["warm_start"] = a.warm_start;
    const KrausEstimate est = fit_kraus(data, spam, config, {a.warm_start});
    io::write_json(a.out, io::make_document("kraus", io::to_json(est),
                                            manifest("fit", inputs, config_doc, config.seed, start)));
    if (!est.ok()) {
      for (const auto& f : est.fits) {
        if (!f.ok) std::cerr << "t = " << f.time_us << " us: " << f.message << '\n';
      }
      return static_cast<int>(ExitCode::optimizer);
    }
    return 0;
  }

  // Lindblad stage.
  const LindbladMode mode = parse_mode(a.mode);
  config_doc["mode"] = a.mode;
  const LindbladEstimate est = fit_lindblad(data, spam, mode, config);
  io::write_json(a.out, io::make_document("lindblad", io::to_json(est),
                                          manifest("fit", inputs, config_doc, config.seed, start)));
  return 0;
}

LindbladModel model_input(const AnalyzeArgs& a, std::vector<std::string>& inputs) {
  if (!a.lindblad.empty()) {
    inputs.push_back(a.lindblad);
    return io::read_lindblad(a.lindblad).model;
  }
  require(a.model, "--lindblad or --model");
  inputs.push_back(a.model);
  return io::read_model(a.model);
}

int run_analyze(const AnalyzeArgs& a) {
  const auto start = Clock::now();
  std::vector<std::string> inputs;
  Json config = {{"kind", a.kind}};
  const auto write = [&](const Json& body, const io::CsvTable* table) {
    io::write_json(a.out, io::make_document(a.kind + "-report", body,
                                            manifest("analyze", inputs, config, a.seed, start)));
    if (table) io::write_csv(csv_path(a.out), *table);
  };

  if (a.kind == "markov") {
    require(a.kraus, "--kraus");
    inputs.push_back(a.kraus);
    const KrausEstimate est = io::read_kraus(a.kraus);
    const auto channels = est.channels();
    std::optional<SpamEstimate> spam;
    if (!a.spam.empty()) {
      spam = io::read_spam(a.spam);
      inputs.push_back(a.spam);
    }
    if ((a.use_spam_preps || a.noise_resamples > 0) && !spam) {
      throw DependencyError("--use-spam-preps and --noise-resamples need --spam");
    }
    config["use_spam_preps"] = a.use_spam_preps;
    config["noise_resamples"] = a.noise_resamples;
    const auto candidates = all_preps(est.n_qubits);
    MarkovReport report = n_markov(channels, candidates,
                                   a.use_spam_preps ? std::optional(spam->rho0) : std::nullopt);
    if (a.noise_resamples > 0) {
      NoiseFloorOptions opt;
      opt.resamples = a.noise_resamples;
      opt.seed = a.seed;
      report.noise_floor = noise_floor(channels, *spam, candidates, opt);
    }
    io::CsvTable table{{"time_us", "distance"}, {}};
    for (const auto& p : report.series) table.rows.push_back({p.time_us, p.distance});
    write(io::to_json(report), &table);
    return 0;
  }

  if (a.kind == "zz") {
    Json body = Json::object();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double zz_h = nan, zz_dev = nan, zz_dev_signed = nan;
    if (!a.lindblad.empty() || !a.model.empty()) {
      zz_h = zz_from_hamiltonian(model_input(a, inputs).hamiltonian());
      body["zz_hamiltonian_mhz"] = zz_h;
    }
    if (a.g || a.eta_a || a.eta_b || a.delta) {
      if (!(a.g && a.eta_a && a.eta_b && a.delta)) {
        throw DependencyError("device estimate needs --g, --eta-a, --eta-b and --delta");
      }
      const DeviceParams p{*a.g, *a.eta_a, *a.eta_b, *a.delta};
      if (!(p.g_mhz > 0.0)) throw ModelError("coupling g must be positive");
      zz_dev_signed = zz_from_device_signed(p);
      zz_dev = std::abs(zz_dev_signed);
      config["device"] = {p.g_mhz, p.eta_a_mhz, p.eta_b_mhz, p.delta_mhz};
      body["zz_device_mhz"] = zz_dev;
      body["zz_device_signed_mhz"] = zz_dev_signed;
    }
    if (body.empty()) throw DependencyError("zz needs a Hamiltonian source or device parameters");
    io::CsvTable table{{"zz_hamiltonian_mhz", "zz_device_mhz", "zz_device_signed_mhz"},
                       {{zz_h, zz_dev, zz_dev_signed}}};
    write(body, &table);
    return 0;
  }

  if (a.kind == "compare") {
    require(a.free, "--free");
    require(a.restricted, "--restricted");
    require(a.spam, "--spam");
    inputs = {a.free, a.restricted, a.spam};
    config["times"] = a.times;
    const CompareReport report = compare_report(io::read_lindblad(a.free), io::read_lindblad(a.restricted),
                                                io::read_spam(a.spam), parse_time_grid(a.times));
    io::CsvTable table{{"time_us", "delta"}, {}};
    for (const auto& p : report.delta) table.rows.push_back({p.time_us, p.delta});
    write(io::to_json(report), &table);
    return 0;
  }

  if (a.kind == "steady") {
    const LindbladModel model = model_input(a, inputs);
    const DensityMatrix ss = steady_state(model);
    Json body = {{"steady_state", io::to_json(ss.matrix())}};
    if (!a.spam.empty()) {
      inputs.push_back(a.spam);
      const SpamEstimate spam = io::read_spam(a.spam);
      if (spam.rho0.dim() != model.dim()) throw ModelError("SPAM and model dimensions differ");
      body["distance_to_rho0"] = trace_distance(ss, spam.rho0);
    }
    write(body, nullptr);
    return 0;
  }
  throw SchemaError("unknown analysis kind " + a.kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lindblad tomography toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (default: LINDTOMO_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset from a model");
  simulate->add_option("--model", sim.model, "Model document")->required();
  simulate->add_option("--spam", sim.spam, "SPAM document (default: ideal)");
  simulate->add_option("--qubits", sim.qubits, "Qubit count (checked against the model)");
  simulate->add_option("--times", sim.times, "Time grid: lin:a:b:n, log:a:b:n or a list (us)");
  simulate->add_option("--shots", sim.shots, "Shots per sequence and time");
  simulate->add_option("--seed", sim.seed, "Sampling seed");
  simulate->add_option("--out", sim.out, "Output dataset")->required();

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Estimate SPAM, Kraus or Lindblad parameters");
  fitc->add_option("--data", fit.data, "Dataset document")->required();
  fitc->add_option("--stage", fit.stage, "Estimation stage")
      ->required()
      ->check(CLI::IsMember({"spam", "kraus", "lindblad"}));
  fitc->add_option("--mode", fit.mode, "Lindblad mode")->check(CLI::IsMember({"free", "restricted"}));
  fitc->add_option("--exclude", fit.exclude, "Drop records, e.g. prep=-i,basis=y (repeatable)");
  fitc->add_option("--config", fit.config, "Optimizer config document");
  fitc->add_option("--spam", fit.spam, "SPAM estimate (kraus and lindblad stages)");
  fitc->add_option("--seed", fit.seed, "Optimizer seed (overrides the config)");
  fitc->add_flag("--warm-start", fit.warm_start, "Kraus: start each time from the previous estimate");
  fitc->add_option("--out", fit.out, "Output estimate")->required();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Markovianity, ZZ, model comparison, steady state");
  analyze->add_option("--kind", an.kind, "Analysis")
      ->required()
      ->check(CLI::IsMember({"markov", "zz", "compare", "steady"}));
  analyze->add_option("--kraus", an.kraus, "Kraus estimate (markov)");
  analyze->add_option("--spam", an.spam, "SPAM estimate");
  analyze->add_option("--lindblad", an.lindblad, "Lindblad estimate (zz, steady)");
  analyze->add_option("--model", an.model, "Model document (zz, steady)");
  analyze->add_option("--free", an.free, "Free-mode Lindblad estimate (compare)");
  analyze->add_option("--restricted", an.restricted, "Restricted-mode Lindblad estimate (compare)");
  analyze->add_option("--times", an.times, "Time grid for compare");
  analyze->add_flag("--use-spam-preps", an.use_spam_preps,
                    "markov: candidate states from rho0 instead of ideal pure states");
  analyze->add_option("--noise-resamples", an.noise_resamples, "markov: resamples for the noise floor");
  analyze->add_option("--seed", an.seed, "Resampling seed");
  analyze->add_option("--g", an.g, "Coupling g/2pi (MHz)");
  analyze->add_option("--eta-a", an.eta_a, "Anharmonicity of qubit A (MHz)");
  analyze->add_option("--eta-b", an.eta_b, "Anharmonicity of qubit B (MHz)");
  analyze->add_option("--delta", an.delta, "Detuning omega_A - omega_B (MHz)");
  analyze->add_option("--out", an.out, "Output report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::schema);
  }

  try {
    if (threads > 0) set_max_threads(threads);
    if (simulate->parsed()) return run_simulate(sim);
    if (fitc->parsed()) return run_fit(fit);
    return run_analyze(an);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::schema);
  }
}
