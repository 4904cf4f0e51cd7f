#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "app/commands.hpp"
#include "app/run_config.hpp"

int main(int argc, char** argv) {
  using namespace slitqfi::app;

  CLI::App cli{"Quantum and classical Fisher-information limits of a Fabry-Perot slit sensor"};
  std::string config_path;
  std::string command_name = "sweep";
  std::string out_dir;
  int workers = 0;
  unsigned long long seed = 0;
  cli.add_option("--config", config_path, "JSON run configuration")->required();
  cli.add_option("--command", command_name, "sweep | point | oracle-check | compare")
      ->capture_default_str();
  cli.add_option("--out-dir", out_dir, "Override output.dir");
  cli.add_option("--workers", workers, "Override the worker count")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = cli.add_option("--seed", seed, "Seed for fuzz suites (recorded only)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return kExitSchema;
  }

  const auto command = command_from_string(command_name);
  if (!command) {
    std::cerr << "error: --command: unknown command '" << command_name << "'\n";
    return kExitSchema;
  }

  RunConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const ConfigFileMissing& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingFile;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitSchema;
  }
  if (!out_dir.empty()) cfg.output.dir = out_dir;
  if (workers > 0) cfg.workers = workers;
  if (*seed_opt) cfg.seed = seed;

  return run_command(*command, cfg, std::cout, std::cerr);
}
