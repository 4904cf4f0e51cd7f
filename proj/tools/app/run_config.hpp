#pragma once

// JSON run configuration for the slitqfi CLI. Every field has a default, so a
// document containing only a "slit" block is complete; to_json() echoes the
// fully resolved configuration.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "slitqfi/sweep.hpp"

namespace slitqfi::app {

// Raised for schema violations; the message starts with the JSON field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// The config file could not be opened.
class ConfigFileMissing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleCheckConfig {
  double tolerance = 1e-4;
  int cutoff = 50;
  double fd_step = 1e-4;       // Fock-side derivative step
  double gaussian_fd_step = 1e-5;
  std::vector<double> coherent_nbar = {0.5, 1.0, 2.0};
  std::vector<double> squeezed_r = {0.3, 0.7};
  std::vector<double> eta = {0.3, 0.6, 1.0};
  std::vector<double> dphi_dtheta = {0.5, 1.0};
};

struct OutputConfig {
  std::string dir = "out";
  std::string csv = "sweep.csv";
  std::string report = "optima.json";
  std::string config_echo = "resolved_config.json";
};

struct RunConfig {
  SweepConfig sweep;
  std::string dispersion_table;  // tabulated variant only, as written
  double point_theta = 120.0;
  OracleCheckConfig oracle;
  OutputConfig output;
  int workers = 1;
  unsigned long long seed = 0;  // reserved for fuzz suites
};

// Throws ConfigFileMissing or ConfigError.
RunConfig parse_config(const std::filesystem::path& path);
// `base_dir` resolves a relative dispersion table path.
RunConfig parse_config_json(const nlohmann::json& doc,
                            const std::filesystem::path& base_dir = {});

nlohmann::json to_json(const RunConfig& cfg);

// Default demo configuration (toy slit, width sweep, three probes).
RunConfig demo_config();

}  // namespace slitqfi::app
