#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace netsde {

/// Parsed command line shared by every subcommand.
struct RunConfig {
  std::string subcommand;
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t base_seed = 0;
  int jobs = 1;
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "NETSDE_OUT_DIR";

/// Each command returns a process exit code (see ExitCode) and reports
/// errors on `err`; library exceptions are translated, never propagated.
int cmd_validate(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_plan(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_experiment(const RunConfig& rc, std::ostream& out, std::ostream& err);

/// Dispatches on rc.subcommand.
int run_command(const RunConfig& rc, std::ostream& out, std::ostream& err);

}  // namespace netsde
