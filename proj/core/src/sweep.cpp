#include "slitqfi/sweep.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "slitqfi/error.hpp"
#include "slitqfi/metrology.hpp"
#include "slitqfi/numerics.hpp"

namespace slitqfi {
namespace {

struct PointOutcome {
  std::optional<SweepRecord> record;
  std::string error;
};

SweepRecord evaluate_point(const SweepConfig& cfg, double theta,
                           int homodyne_probe, int balanced_probe) {
  FPChannelPoint point = channel_point(cfg.slit, theta, cfg.fd_step);
  if (cfg.eta.mode == EtaSetting::Mode::kFixed) {
    point.eta = cfg.eta.fixed;
    point.deta_dtheta = 0.0;
  }

  SweepRecord rec;
  rec.theta = theta;
  rec.phi = point.phi;
  rec.dphi_dtheta = point.dphi_dtheta;
  rec.eta = point.eta;
  rec.deta_dtheta = point.deta_dtheta;
  rec.gen_sq = point.dphi_dtheta * point.dphi_dtheta;
  try {
    rec.q_factor = quality_factor(cfg.slit, theta, cfg.q_window).q_factor;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoResonance &&
        e.code() != ErrorCode::kWindowTooNarrow)
      throw;
  }

  rec.qfi.reserve(cfg.probes.size());
  for (std::size_t k = 0; k < cfg.probes.size(); ++k) {
    const StateFamily family =
        build_mzi_output(cfg.probes[k].spec, point, cfg.phi_ref, cfg.fd_step);
    rec.qfi.push_back(gaussian_qfi(family, theta, cfg.fd_step).qfi);
    if (static_cast<int>(k) == homodyne_probe) {
      double best = 0.0;
      for (int mode = 0; mode < 2; ++mode)
        best = std::max(best,
                        optimal_homodyne_fi(family, theta, mode, cfg.fd_step).fi);
      rec.fi_homodyne_opt = best;
    }
  }
  if (balanced_probe >= 0)
    rec.fi_balanced = balanced_detection_fi(cfg.probes[balanced_probe].spec,
                                            point, cfg.phi_ref, cfg.fd_step);
  if (!cfg.probes.empty())
    rec.channel_qfi = coherent_qfi(cfg.probes.front().spec.nbar, point).qfi;
  return rec;
}

std::string format_number(const std::optional<double>& v) {
  return v ? fmt::format("{:.17g}", *v) : std::string();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::optional<double> parse_field(const std::string& text, std::size_t line_no,
                                  const std::string& column) {
  if (text.empty()) return std::nullopt;
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == text.size(), ErrorCode::kParse,
          fmt::format("line {}: column {}: '{}' is not a number", line_no,
                      column, text));
  return value;
}

}  // namespace

std::vector<double> ThetaGrid::values() const {
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i)
    out[i] = i + 1 == points ? max : min + i * step();
  return out;
}

void SweepConfig::validate() const {
  slit.validate();
  require(std::isfinite(grid.min) && std::isfinite(grid.max) &&
              grid.min < grid.max,
          ErrorCode::kInvalidConfig, "theta_grid.min must be < theta_grid.max");
  require(grid.points >= 3, ErrorCode::kInvalidConfig,
          "theta_grid.points must be >= 3");
  require(eta.mode == EtaSetting::Mode::kModel ||
              (eta.fixed > 0.0 && eta.fixed <= 1.0),
          ErrorCode::kInvalidConfig, "eta_mode.fixed must lie in (0, 1]");
  require(fd_step > 0.0, ErrorCode::kInvalidConfig, "fd_step must be > 0");
  require(q_window.lo > 0.0 && q_window.hi > q_window.lo,
          ErrorCode::kInvalidConfig, "q_window must satisfy 0 < lo < hi");
  std::set<std::string> labels;
  for (const auto& p : probes) {
    require(!p.label.empty() && labels.insert(p.label).second,
            ErrorCode::kInvalidConfig,
            fmt::format("probe labels must be unique and non-empty ('{}')",
                        p.label));
    try {
      p.spec.validate();
    } catch (const Error& e) {
      fail(ErrorCode::kInvalidConfig, e.what());
    }
  }
}

SweepResult run_sweep(const SweepConfig& cfg, int workers) {
  cfg.validate();
  SweepResult result;
  for (const auto& p : cfg.probes) result.probe_labels.push_back(p.label);
  result.homodyne_probe = cfg.probes.empty() ? -1 : 0;
  for (std::size_t k = 0; k < cfg.probes.size(); ++k) {
    if (cfg.probes[k].spec.kind == ProbeKind::kCoherent) {
      result.balanced_probe = static_cast<int>(k);
      break;
    }
  }

  const std::vector<double> thetas = cfg.grid.values();
  std::vector<PointOutcome> outcomes(thetas.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < thetas.size(); i = next++) {
      try {
        outcomes[i].record = evaluate_point(cfg, thetas[i], result.homodyne_probe,
                                            result.balanced_probe);
      } catch (const Error& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  const int n_workers = std::max(1, workers);
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  }

  std::vector<std::string> failures;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (outcomes[i].record)
      result.records.push_back(std::move(*outcomes[i].record));
    else
      failures.push_back(fmt::format("theta={} ({})", thetas[i], outcomes[i].error));
  }
  if (2 * failures.size() > thetas.size()) {
    std::string list;
    for (const auto& f : failures) list += "\n  " + f;
    fail(ErrorCode::kSweepFailed,
         fmt::format("{} of {} grid points failed:{}", failures.size(),
                     thetas.size(), list));
  }
  return result;
}

std::vector<std::string> csv_columns(const SweepResult& result) {
  std::vector<std::string> cols = {"theta", "phi", "dphi_dtheta", "eta",
                                   "deta_dtheta", "q_factor", "gen_sq"};
  for (const auto& label : result.probe_labels) cols.push_back("qfi_" + label);
  cols.push_back("fi_homodyne_opt");
  cols.push_back("fi_balanced");
  return cols;
}

std::vector<std::optional<double>> column_values(const SweepResult& result,
                                                 std::string_view column) {
  std::vector<std::optional<double>> out;
  out.reserve(result.records.size());
  auto collect = [&](auto&& get) {
    for (const auto& r : result.records) out.push_back(get(r));
  };
  using Opt = std::optional<double>;
  if (column == "theta") collect([](const SweepRecord& r) -> Opt { return r.theta; });
  else if (column == "phi") collect([](const SweepRecord& r) -> Opt { return r.phi; });
  else if (column == "dphi_dtheta") collect([](const SweepRecord& r) -> Opt { return r.dphi_dtheta; });
  else if (column == "eta") collect([](const SweepRecord& r) -> Opt { return r.eta; });
  else if (column == "deta_dtheta") collect([](const SweepRecord& r) -> Opt { return r.deta_dtheta; });
  else if (column == "q_factor") collect([](const SweepRecord& r) { return r.q_factor; });
  else if (column == "gen_sq") collect([](const SweepRecord& r) -> Opt { return r.gen_sq; });
  else if (column == "fi_homodyne_opt") collect([](const SweepRecord& r) { return r.fi_homodyne_opt; });
  else if (column == "fi_balanced") collect([](const SweepRecord& r) { return r.fi_balanced; });
  else {
    const auto it = std::find_if(
        result.probe_labels.begin(), result.probe_labels.end(),
        [&](const std::string& label) { return column == "qfi_" + label; });
    require(it != result.probe_labels.end(), ErrorCode::kNoData,
            fmt::format("unknown column '{}'", column));
    const auto k = static_cast<std::size_t>(it - result.probe_labels.begin());
    collect([k](const SweepRecord& r) { return r.qfi[k]; });
  }
  return out;
}

ArgmaxResult refine_argmax(const std::vector<double>& thetas,
                           const std::vector<std::optional<double>>& values) {
  require(thetas.size() == values.size(), ErrorCode::kInvalidArgument,
          "theta and value columns differ in length");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] && (!best || *values[i] > *values[*best])) best = i;
  require(best.has_value(), ErrorCode::kNoData, "column has no values");

  const std::size_t i = *best;
  ArgmaxResult out{thetas[i], *values[i], i, true};
  if (i == 0 || i + 1 >= values.size() || !values[i - 1] || !values[i + 1])
    return out;
  const auto vertex = numerics::parabola_vertex(
      thetas[i], thetas[i] - thetas[i - 1], thetas[i + 1] - thetas[i],
      *values[i - 1], *values[i], *values[i + 1]);
  out.at_edge = false;
  if (vertex.valid && vertex.x >= thetas[i - 1] && vertex.x <= thetas[i + 1]) {
    out.theta_star = vertex.x;
    out.value = vertex.value;
  }
  return out;
}

ArgmaxResult refine_argmax(const SweepResult& result, std::string_view column) {
  std::vector<double> thetas;
  thetas.reserve(result.records.size());
  for (const auto& r : result.records) thetas.push_back(r.theta);
  return refine_argmax(thetas, column_values(result, column));
}

OptimaReport compare_optima(const SweepResult& result) {
  const auto q = column_values(result, "q_factor");
  std::size_t run = 0;
  std::size_t longest = 0;
  for (const auto& v : q) {
    run = v ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  require(longest >= 3, ErrorCode::kNoData,
          "q_factor must be present on at least 3 consecutive records");

  OptimaReport report;
  if (result.records.size() >= 2) {
    report.grid_step = (result.records.back().theta - result.records.front().theta) /
                       static_cast<double>(result.records.size() - 1);
  }
  report.argmax_q = refine_argmax(result, "q_factor");
  report.argmax_gen = refine_argmax(result, "gen_sq");
  for (const auto& label : result.probe_labels) {
    ProbeOptimum p;
    p.label = label;
    p.argmax_qfi = refine_argmax(result, "qfi_" + label);
    p.separation = std::abs(report.argmax_q.theta_star - p.argmax_qfi.theta_star);
    p.separated = p.separation > 2.0 * report.grid_step;
    report.probes.push_back(std::move(p));
  }
  return report;
}

void attach_normalized_curves(OptimaReport& report, const SweepResult& result) {
  std::vector<std::string> names = {"q_factor", "gen_sq"};
  for (const auto& label : result.probe_labels) names.push_back("qfi_" + label);
  for (const auto& name : names) {
    auto values = column_values(result, name);
    double peak = 0.0;
    for (const auto& v : values)
      if (v) peak = std::max(peak, *v);
    for (auto& v : values)
      if (v) v = peak > 0.0 ? *v / peak : 0.0;
    report.curves[name] = std::move(values);
  }
  report.normalized_curves = true;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  const auto cols = csv_columns(result);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const auto& r : result.records) {
    out << format_number(r.theta) << ',' << format_number(r.phi) << ','
        << format_number(r.dphi_dtheta) << ',' << format_number(r.eta) << ','
        << format_number(r.deta_dtheta) << ',' << format_number(r.q_factor)
        << ',' << format_number(r.gen_sq);
    for (const auto& v : r.qfi) out << ',' << format_number(v);
    out << ',' << format_number(r.fi_homodyne_opt) << ','
        << format_number(r.fi_balanced) << '\n';
  }
}

SweepResult read_sweep_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse,
          "line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  const std::vector<std::string> head = {"theta", "phi", "dphi_dtheta", "eta",
                                         "deta_dtheta", "q_factor", "gen_sq"};
  require(header.size() >= head.size() + 2 &&
              std::equal(head.begin(), head.end(), header.begin()) &&
              header[header.size() - 2] == "fi_homodyne_opt" &&
              header.back() == "fi_balanced",
          ErrorCode::kParse, fmt::format("line 1: unexpected header '{}'", line));

  SweepResult result;
  for (std::size_t c = head.size(); c + 2 < header.size(); ++c) {
    require(header[c].rfind("qfi_", 0) == 0 && header[c].size() > 4,
            ErrorCode::kParse,
            fmt::format("line 1: column '{}' is not a qfi_<probe> column",
                        header[c]));
    result.probe_labels.push_back(header[c].substr(4));
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    require(fields.size() == header.size(), ErrorCode::kParse,
            fmt::format("line {}: expected {} fields, got {}", line_no,
                        header.size(), fields.size()));
    auto required = [&](std::size_t c) {
      const auto v = parse_field(fields[c], line_no, header[c]);
      require(v.has_value(), ErrorCode::kParse,
              fmt::format("line {}: column {} must not be empty", line_no,
                          header[c]));
      return *v;
    };
    SweepRecord r;
    r.theta = required(0);
    r.phi = required(1);
    r.dphi_dtheta = required(2);
    r.eta = required(3);
    r.deta_dtheta = required(4);
    r.q_factor = parse_field(fields[5], line_no, header[5]);
    r.gen_sq = required(6);
    for (std::size_t c = head.size(); c + 2 < header.size(); ++c)
      r.qfi.push_back(parse_field(fields[c], line_no, header[c]));
    r.fi_homodyne_opt = parse_field(fields[header.size() - 2], line_no,
                                    header[header.size() - 2]);
    r.fi_balanced = parse_field(fields.back(), line_no, header.back());
    require(result.records.empty() || r.theta > result.records.back().theta,
            ErrorCode::kParse,
            fmt::format("line {}: theta not strictly increasing", line_no));
    result.records.push_back(std::move(r));
  }
  return result;
}

}  // namespace slitqfi
