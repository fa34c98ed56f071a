// Command-line driver: validate | plan | simulate | experiment.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "netsde/cli.hpp"
#include "netsde/config.hpp"

int main(int argc, char** argv) {
  netsde::RunConfig rc;
  const char* env_out = std::getenv(netsde::kOutDirEnv);
  rc.out_dir = env_out ? env_out : "out";

  CLI::App app{"Thompson-sampling control of networked LQG systems"};
  app.require_subcommand(1, 1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", rc.config_path, "JSON config file");
    sub->add_option("--set", rc.overrides, "Override, key.path=value (repeatable)");
    sub->add_option("--out", rc.out_dir, "Output directory")
        ->capture_default_str();
    sub->add_option("--seed", rc.base_seed, "Base seed")->capture_default_str();
    sub->add_option("--jobs", rc.jobs, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--preset", rc.preset, "Built-in configuration")
        ->check(CLI::IsMember(netsde::preset_names()));
  };
  add_common(app.add_subcommand("validate", "Check model assumptions"));
  add_common(app.add_subcommand("plan", "Known-model gains and optimal cost"));
  add_common(app.add_subcommand("simulate", "Run one learning trajectory"));
  add_common(app.add_subcommand("experiment", "Monte-Carlo regret experiment"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(netsde::ExitCode::kConfig);
  }
  rc.subcommand = app.get_subcommands().front()->get_name();
  return netsde::run_command(rc, std::cout, std::cerr);
}
