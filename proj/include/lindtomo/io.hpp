#pragma once

// Versioned JSON documents and CSV tables for every persisted object.
//
// A document is an object { version, kind, manifest, ... } whose remaining
// members depend on the kind. Complex matrices are arrays of rows, each row
// an array of [re, im] pairs.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lindtomo/analysis.hpp"
#include "lindtomo/kraus_fit.hpp"
#include "lindtomo/lindblad_fit.hpp"
#include "lindtomo/markovianity.hpp"
#include "lindtomo/spam_fit.hpp"
#include "lindtomo/synthdata.hpp"

namespace lindtomo::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolkitVersion = "0.1.0";

struct Manifest {
  std::string command;
  std::vector<std::string> inputs;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = kToolkitVersion;
  // Serialized together under "timestamp", the only member that differs
  // between runs with identical inputs.
  std::string timestamp;  // ISO 8601 UTC
  double wall_time_s = 0.0;
};

// Hex digest of a canonical JSON dump.
std::string config_hash(const Json& config);
std::string utc_timestamp();

Json to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j);
Json to_json(const Manifest& m);
Manifest manifest_from_json(const Json& j);

Json to_json(const Dataset& d);
Dataset dataset_from_json(const Json& j);
Json to_json(const LindbladModel& m);
LindbladModel model_from_json(const Json& j);
Json to_json(const SpamEstimate& s);
SpamEstimate spam_from_json(const Json& j);
Json to_json(const KrausEstimate& k);
KrausEstimate kraus_from_json(const Json& j);
Json to_json(const LindbladEstimate& e);
LindbladEstimate lindblad_from_json(const Json& j);
Json to_json(const MarkovReport& r);
MarkovReport markov_from_json(const Json& j);
Json to_json(const CompareReport& r);
CompareReport compare_from_json(const Json& j);
// Per-start wall time is not persisted.
Json to_json(const FitReport& r);
FitReport fit_report_from_json(const Json& j);

// Config file keys: gtol, ftol, max_iters, n_starts, seed, barrier_init,
// barrier_growth. Unknown keys are a schema error.
OptimizerConfig config_from_json(const Json& j);
Json to_json(const OptimizerConfig& c);

// Adds version, kind and manifest in front of the body members.
Json make_document(std::string_view kind, const Json& body, const Manifest& manifest);
// Checks version and kind; SchemaError otherwise.
const Json& expect_document(const Json& doc, std::string_view kind);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);

// Reads a document of the given kind and decodes it.
Dataset read_dataset(const std::filesystem::path& path);
LindbladModel read_model(const std::filesystem::path& path);
SpamEstimate read_spam(const std::filesystem::path& path);
KrausEstimate read_kraus(const std::filesystem::path& path);
LindbladEstimate read_lindblad(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace lindtomo::io
