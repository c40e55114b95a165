#pragma once

#include <stdexcept>
#include <string>

namespace lindtomo {

// Process exit codes shared by the CLI. Library errors carry the code that
// the front end should return when they escape a command.
enum class ExitCode : int {
  ok = 0,
  schema = 2,
  model = 3,
  dependency = 4,
  optimizer = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Malformed documents, labels, filters and time grids.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(ExitCode::schema, what) {}
};

// Inputs that parse but describe something unphysical or inconsistent
// (dimension mismatch, non-PSD matrices, degenerate steady state, ...).
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what) : Error(ExitCode::model, what) {}
};

class DimensionError : public ModelError {
 public:
  explicit DimensionError(const std::string& what) : ModelError(what) {}
};

class DependencyError : public Error {
 public:
  explicit DependencyError(const std::string& what) : Error(ExitCode::dependency, what) {}
};

class OptimizerError : public Error {
 public:
  explicit OptimizerError(const std::string& what) : Error(ExitCode::optimizer, what) {}
};

}  // namespace lindtomo
