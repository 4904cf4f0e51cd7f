#pragma once

// Parameter sweeps over theta: per-point channel data, quality factor,
// quantum and classical Fisher information, and argmax comparison.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slitqfi/gaussian.hpp"
#include "slitqfi/slit_model.hpp"

namespace slitqfi {

struct ThetaGrid {
  double min = 60.0;
  double max = 220.0;
  int points = 161;

  std::vector<double> values() const;
  double step() const { return (max - min) / (points - 1); }
};

struct EtaSetting {
  enum class Mode { kModel, kFixed };
  Mode mode = Mode::kModel;
  double fixed = 1.0;
};

struct NamedProbe {
  std::string label;  // column suffix, qfi_<label>
  ProbeSpec spec;
};

struct SweepConfig {
  SlitConfig slit;
  ThetaGrid grid;
  std::vector<NamedProbe> probes;
  double phi_ref = 0.0;
  EtaSetting eta;
  double fd_step = 1e-5;
  WavelengthWindow q_window{450.0, 900.0};

  // Throws kInvalidConfig.
  void validate() const;
};

struct SweepRecord {
  double theta = 0.0;
  double phi = 0.0;
  double dphi_dtheta = 0.0;
  double eta = 0.0;
  double deta_dtheta = 0.0;
  std::optional<double> q_factor;
  double gen_sq = 0.0;
  std::vector<std::optional<double>> qfi;  // one per probe, MZI protocol
  std::optional<double> fi_homodyne_opt;
  std::optional<double> fi_balanced;
  // Channel-level coherent value for the first probe's nbar (full probe
  // energy through the slit); not part of the CSV.
  std::optional<double> channel_qfi;
};

// A sweep table. fi_homodyne_opt belongs to probe `homodyne_probe`,
// fi_balanced to probe `balanced_probe` (-1 when no coherent probe exists).
struct SweepResult {
  std::vector<std::string> probe_labels;
  std::vector<SweepRecord> records;
  int homodyne_probe = 0;
  int balanced_probe = -1;
};

// Evaluates every grid point (optionally on `workers` threads; the output
// does not depend on the worker count). Points whose channel evaluation
// fails are dropped; more than half failing raises kSweepFailed.
SweepResult run_sweep(const SweepConfig& cfg, int workers = 1);

// Column names follow the CSV header.
std::vector<std::string> csv_columns(const SweepResult& result);
std::vector<std::optional<double>> column_values(const SweepResult& result,
                                                 std::string_view column);

struct ArgmaxResult {
  double theta_star = 0.0;
  double value = 0.0;
  std::size_t grid_index = 0;
  bool at_edge = false;  // no usable bracket: grid point returned
};

// Grid argmax (ties to smallest theta) refined by the parabola through the
// argmax and its two neighbours. Throws kNoData when the column is empty.
ArgmaxResult refine_argmax(const SweepResult& result, std::string_view column);
ArgmaxResult refine_argmax(const std::vector<double>& thetas,
                           const std::vector<std::optional<double>>& values);

struct ProbeOptimum {
  std::string label;
  ArgmaxResult argmax_qfi;
  double separation = 0.0;  // |theta*_Q - theta*_QFI|
  bool separated = false;   // separation > 2 grid steps
};

struct OptimaReport {
  ArgmaxResult argmax_q;
  ArgmaxResult argmax_gen;
  std::vector<ProbeOptimum> probes;
  double grid_step = 0.0;
  bool normalized_curves = false;
  // Every curve divided by its own maximum; filled by with_normalized_curves.
  std::map<std::string, std::vector<std::optional<double>>> curves;
};

OptimaReport compare_optima(const SweepResult& result);

// Adds the normalised q_factor, gen_sq and qfi_* curves to the report.
void attach_normalized_curves(OptimaReport& report, const SweepResult& result);

// Bitwise-stable CSV (17 significant digits, empty field = absent).
void write_sweep_csv(std::ostream& out, const SweepResult& result);
SweepResult read_sweep_csv(std::istream& in);

}  // namespace slitqfi
