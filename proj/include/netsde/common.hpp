#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace netsde {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Process exit codes shared by every CLI subcommand.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kAssumption = 3,
  kNumeric = 4,
};

/// Base of all library errors; carries the exit code the CLI maps it to.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

/// Malformed or inconsistent configuration. `key_path` names the offending
/// entry in dotted form, e.g. "model.Q".
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : Error(ExitCode::kConfig, key_path.empty() ? what : key_path + ": " + what),
        key_path_(std::move(key_path)) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

/// One of the model's standing assumptions (A1..A8) does not hold.
class AssumptionError : public Error {
 public:
  AssumptionError(std::string assumption, const std::string& what)
      : Error(ExitCode::kAssumption, assumption + " violated: " + what),
        assumption_(std::move(assumption)) {}
  const std::string& assumption() const { return assumption_; }

 private:
  std::string assumption_;
};

/// Iterative solver failure or state blow-up.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ExitCode::kNumeric, what) {}
};

}  // namespace netsde
