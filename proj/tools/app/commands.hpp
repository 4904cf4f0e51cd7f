#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "run_config.hpp"

namespace slitqfi::app {

enum class Command { kSweep, kPoint, kOracleCheck, kCompare };

std::optional<Command> command_from_string(std::string_view name);

// Exit codes shared by the CLI and its tests.
inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitMissingFile = 2;
inline constexpr int kExitSchema = 3;

struct OracleCase {
  std::string probe;
  double eta = 0.0;
  double dphi_dtheta = 0.0;
  double gaussian = 0.0;
  double fock = 0.0;
  double rel_error = 0.0;
};

struct OracleSummary {
  std::vector<OracleCase> cases;
  double max_rel_error = 0.0;
};

// Gaussian channel QFI against the Fock-space SLD value over the configured
// probe x eta x dphi grid.
OracleSummary run_oracle_check(const OracleCheckConfig& cfg);

nlohmann::json optima_to_json(const OptimaReport& report);

// Runs one command. Output files are written atomically: on any failure the
// files created by this call are removed again.
int run_command(Command cmd, const RunConfig& cfg, std::ostream& out,
                std::ostream& err);

}  // namespace slitqfi::app
