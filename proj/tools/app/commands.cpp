#include "commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "slitqfi/error.hpp"
#include "slitqfi/fock_oracle.hpp"
#include "slitqfi/metrology.hpp"
#include "slitqfi/slit_model.hpp"
#include "slitqfi/sweep.hpp"

namespace slitqfi::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Stages files next to their destination and renames them on commit. Files
// and the output directory created by an uncommitted transaction are removed.
class OutputTransaction {
 public:
  explicit OutputTransaction(fs::path dir) : dir_(std::move(dir)) {}
  OutputTransaction(const OutputTransaction&) = delete;
  OutputTransaction& operator=(const OutputTransaction&) = delete;

  ~OutputTransaction() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, final_path] : staged_) fs::remove(tmp, ec);
    if (created_dir_) fs::remove(dir_, ec);  // only succeeds when empty
  }

  void stage(const std::string& name, const std::string& content) {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
    const fs::path final_path = dir_ / name;
    fs::path tmp = final_path;
    tmp += ".partial";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    staged_.emplace_back(tmp, final_path);
    out << content;
    out.close();
    if (!out) fail(ErrorCode::kInvalidArgument, fmt::format("cannot write '{}'", tmp.string()));
  }

  void commit() {
    for (const auto& [tmp, final_path] : staged_) fs::rename(tmp, final_path);
    committed_ = true;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<fs::path, fs::path>> staged_;
  bool created_dir_ = false;
  bool committed_ = false;
};

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json argmax_to_json(const ArgmaxResult& a) {
  return {{"theta_star", a.theta_star},
          {"value", a.value},
          {"grid_index", a.grid_index},
          {"bracket_at_edge", a.at_edge}};
}

json point_to_json(const FPChannelPoint& p) {
  return {{"theta", p.theta},
          {"theta_name", std::string(to_string(p.theta_name))},
          {"phi", p.phi},
          {"eta", p.eta},
          {"dphi_dtheta", p.dphi_dtheta},
          {"deta_dtheta", p.deta_dtheta}};
}

json fisher_to_json(const FisherReport& r) {
  return {{"theta", r.theta},
          {"qfi", r.qfi},
          {"method", std::string(to_string(r.method))},
          {"fd_step", r.fd_step}};
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const SweepResult result = run_sweep(cfg.sweep, cfg.workers);
  OptimaReport report = compare_optima(result);
  attach_normalized_curves(report, result);

  std::ostringstream csv;
  write_sweep_csv(csv, result);
  OutputTransaction tx(cfg.output.dir);
  tx.stage(cfg.output.csv, csv.str());
  tx.stage(cfg.output.report, optima_to_json(report).dump(2) + "\n");
  tx.stage(cfg.output.config_echo, to_json(cfg).dump(2) + "\n");
  tx.commit();

  out << fmt::format("sweep: {} records -> {}\n", result.records.size(),
                     (fs::path(cfg.output.dir) / cfg.output.csv).string());
  out << fmt::format("argmax Q      theta* = {:.6f}\n", report.argmax_q.theta_star);
  out << fmt::format("argmax gen_sq theta* = {:.6f}\n", report.argmax_gen.theta_star);
  for (const auto& p : report.probes)
    out << fmt::format("argmax qfi_{} theta* = {:.6f} (separation {:.6f}, {})\n",
                       p.label, p.argmax_qfi.theta_star, p.separation,
                       p.separated ? "separated" : "not separated");
  return kExitOk;
}

int cmd_point(const RunConfig& cfg, std::ostream& out) {
  const SweepConfig& s = cfg.sweep;
  FPChannelPoint point = channel_point(s.slit, cfg.point_theta, s.fd_step);
  if (s.eta.mode == EtaSetting::Mode::kFixed) {
    point.eta = s.eta.fixed;
    point.deta_dtheta = 0.0;
  }
  json doc;
  doc["point"] = point_to_json(point);
  try {
    const ResonanceReport q = quality_factor(s.slit, cfg.point_theta, s.q_window);
    doc["resonance"] = {{"lambda_res", q.lambda_res},
                        {"fwhm", q.fwhm},
                        {"q_factor", q.q_factor},
                        {"t_peak", q.t_peak}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoResonance && e.code() != ErrorCode::kWindowTooNarrow)
      throw;
    doc["resonance"] = nullptr;
  }
  json probes = json::array();
  for (const auto& p : s.probes) {
    const StateFamily family = build_mzi_output(p.spec, point, s.phi_ref, s.fd_step);
    json entry = {{"label", p.label},
                  {"channel", fisher_to_json(coherent_qfi(p.spec.nbar, point))},
                  {"mzi", fisher_to_json(gaussian_qfi(family, point.theta, s.fd_step))}};
    probes.push_back(std::move(entry));
  }
  doc["fisher"] = std::move(probes);
  out << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_oracle_check(const RunConfig& cfg, std::ostream& out) {
  const OracleSummary summary = run_oracle_check(cfg.oracle);
  for (const auto& c : summary.cases)
    out << fmt::format("{:<24} eta={:<4} dphi={:<4} gaussian={:.10f} fock={:.10f} rel={:.3e}\n",
                       c.probe, c.eta, c.dphi_dtheta, c.gaussian, c.fock, c.rel_error);
  const bool ok = summary.max_rel_error <= cfg.oracle.tolerance;
  out << fmt::format("max relative error {:.3e} (tolerance {:.1e}): {}\n",
                     summary.max_rel_error, cfg.oracle.tolerance,
                     ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitComputation;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const fs::path csv_path = fs::path(cfg.output.dir) / cfg.output.csv;
  std::ifstream in(csv_path);
  require(in.good(), ErrorCode::kNoData,
          fmt::format("cannot open sweep CSV '{}'", csv_path.string()));
  const SweepResult result = read_sweep_csv(in);
  OptimaReport report = compare_optima(result);
  attach_normalized_curves(report, result);
  OutputTransaction tx(cfg.output.dir);
  tx.stage(cfg.output.report, optima_to_json(report).dump(2) + "\n");
  tx.commit();
  out << optima_to_json(report).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

std::optional<Command> command_from_string(std::string_view name) {
  if (name == "sweep") return Command::kSweep;
  if (name == "point") return Command::kPoint;
  if (name == "oracle-check") return Command::kOracleCheck;
  if (name == "compare") return Command::kCompare;
  return std::nullopt;
}

OracleSummary run_oracle_check(const OracleCheckConfig& cfg) {
  std::vector<std::pair<std::string, ProbeSpec>> probes;
  for (double nbar : cfg.coherent_nbar)
    probes.emplace_back(fmt::format("coherent(nbar={})", nbar), ProbeSpec::coherent(nbar));
  for (double r : cfg.squeezed_r)
    probes.emplace_back(fmt::format("squeezed-vacuum(r={})", r),
                        ProbeSpec::squeezed_vacuum(r));

  OracleSummary summary;
  for (const auto& [name, probe] : probes) {
    for (double eta : cfg.eta) {
      for (double dphi : cfg.dphi_dtheta) {
        FPChannelPoint point;
        point.theta = 0.0;
        point.phi = 0.4;
        point.eta = eta;
        point.dphi_dtheta = dphi;
        const double gaussian =
            gaussian_qfi(build_channel_output(probe, point, cfg.gaussian_fd_step),
                         point.theta, cfg.gaussian_fd_step)
                .qfi;
        const double fock = sld_qfi(fock_channel_family(probe, point, cfg.cutoff),
                                    point.theta, cfg.fd_step);
        OracleCase c{name, eta, dphi, gaussian, fock,
                     std::abs(gaussian - fock) / fock};
        summary.max_rel_error = std::max(summary.max_rel_error, c.rel_error);
        summary.cases.push_back(std::move(c));
      }
    }
  }
  return summary;
}

json optima_to_json(const OptimaReport& report) {
  json probes = json::array();
  for (const auto& p : report.probes)
    probes.push_back({{"label", p.label},
                      {"argmax_qfi", argmax_to_json(p.argmax_qfi)},
                      {"separation", p.separation},
                      {"separated", p.separated}});
  json doc = {{"argmax_q", argmax_to_json(report.argmax_q)},
              {"argmax_gen", argmax_to_json(report.argmax_gen)},
              {"probes", probes},
              {"grid_step", report.grid_step},
              {"normalized_curves_included", report.normalized_curves}};
  if (report.normalized_curves) {
    json curves = json::object();
    for (const auto& [name, values] : report.curves) {
      json arr = json::array();
      for (const auto& v : values) arr.push_back(optional_number(v));
      curves[name] = std::move(arr);
    }
    doc["normalized_curves"] = std::move(curves);
  }
  return doc;
}

int run_command(Command cmd, const RunConfig& cfg, std::ostream& out,
                std::ostream& err) {
  try {
    switch (cmd) {
      case Command::kSweep: return cmd_sweep(cfg, out);
      case Command::kPoint: return cmd_point(cfg, out);
      case Command::kOracleCheck: return cmd_oracle_check(cfg, out);
      case Command::kCompare: return cmd_compare(cfg, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitComputation;
}

}  // namespace slitqfi::app
