#include "run_config.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>

#include "slitqfi/error.hpp"

namespace slitqfi::app {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& as_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.count(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

double number(const json& j, const std::string& key, const std::string& path,
              double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(path, key), "must be finite");
  return x;
}

int integer(const json& j, const std::string& key, const std::string& path,
            int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

std::string text(const json& j, const std::string& key, const std::string& path,
                 const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const json& j, const std::string& key,
                                const std::string& path,
                                const std::vector<double>& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.empty())
    throw ConfigError(join(path, key), "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw ConfigError(fmt::format("{}[{}]", join(path, key), i),
                        "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

ToyDispersion parse_toy(const json& j, const std::string& path) {
  ToyDispersion toy;
  toy.a_len = number(j, "a_len", path, toy.a_len);
  toy.b_end = number(j, "b_end", path, toy.b_end);
  toy.w0 = number(j, "w0", path, toy.w0);
  toy.s_width = number(j, "s_width", path, toy.s_width);
  toy.phi0 = number(j, "phi0", path, toy.phi0);
  check(toy.s_width > 0.0, join(path, "s_width"), "must be > 0");
  return toy;
}

void parse_slit(const json& j, const std::filesystem::path& base_dir,
                RunConfig& cfg) {
  const std::string path = "slit";
  as_object(j, path);
  check_keys(j, path, {"w", "t", "n_out", "lambda0", "mirror_r0", "tau", "dispersion"});
  SlitConfig& slit = cfg.sweep.slit;
  slit.w = number(j, "w", path, slit.w);
  slit.t = number(j, "t", path, slit.t);
  slit.n_out = number(j, "n_out", path, slit.n_out);
  slit.lambda0 = number(j, "lambda0", path, slit.lambda0);
  slit.mirror_r0 = number(j, "mirror_r0", path, slit.mirror_r0);
  slit.tau = number(j, "tau", path, slit.tau);
  check(slit.w > 0.0, "slit.w", "must be > 0");
  check(slit.t > 0.0, "slit.t", "must be > 0");
  check(slit.lambda0 > 0.0, "slit.lambda0", "must be > 0");
  check(slit.w < slit.lambda0, "slit.w", "must be below slit.lambda0");
  check(slit.n_out >= 1.0, "slit.n_out", "must be >= 1");
  check(slit.mirror_r0 >= 0.0 && slit.mirror_r0 < 1.0, "slit.mirror_r0",
        "must lie in [0, 1)");
  check(slit.tau > 0.0 && slit.tau <= 1.0, "slit.tau", "must lie in (0, 1]");

  if (!j.contains("dispersion")) {
    slit.dispersion = ToyDispersion{};
    return;
  }
  const std::string dpath = "slit.dispersion";
  const json& d = as_object(j.at("dispersion"), dpath);
  const std::string variant = text(d, "variant", dpath, "toy");
  if (variant == "toy") {
    check_keys(d, dpath, {"variant", "a_len", "b_end", "w0", "s_width", "phi0"});
    slit.dispersion = parse_toy(d, dpath);
  } else if (variant == "tabulated") {
    check_keys(d, dpath, {"variant", "path"});
    cfg.dispersion_table = text(d, "path", dpath, "");
    check(!cfg.dispersion_table.empty(), dpath + ".path", "required for tabulated");
    std::filesystem::path table = cfg.dispersion_table;
    if (table.is_relative() && !base_dir.empty()) table = base_dir / table;
    // Echoed configs live elsewhere, so they carry the resolved location.
    cfg.dispersion_table = std::filesystem::absolute(table).lexically_normal().string();
    try {
      slit.dispersion = TabulatedDispersion::from_csv_file(table);
    } catch (const Error& e) {
      throw ConfigError(dpath + ".path", e.what());
    }
  } else {
    throw ConfigError(dpath + ".variant", "expected 'toy' or 'tabulated'");
  }
}

NamedProbe parse_probe(const json& j, const std::string& path) {
  as_object(j, path);
  check_keys(j, path, {"label", "kind", "nbar", "squeeze_r", "squeeze_angle",
                       "coherent_phase"});
  ProbeSpec spec;
  try {
    spec.kind = probe_kind_from_string(text(j, "kind", path, "coherent"));
  } catch (const Error&) {
    throw ConfigError(join(path, "kind"),
                      "expected coherent, squeezed-coherent or squeezed-vacuum");
  }
  spec.squeeze_r = number(j, "squeeze_r", path, 0.0);
  spec.squeeze_angle = number(j, "squeeze_angle", path, 0.0);
  spec.coherent_phase = number(j, "coherent_phase", path, 0.0);
  check(spec.squeeze_r >= 0.0, join(path, "squeeze_r"), "must be >= 0");
  const double squeezed = std::sinh(spec.squeeze_r) * std::sinh(spec.squeeze_r);
  const double nbar_default =
      spec.kind == ProbeKind::kSqueezedVacuum ? squeezed : 1.0;
  spec.nbar = number(j, "nbar", path, nbar_default);
  check(spec.nbar >= 0.0, join(path, "nbar"), "must be >= 0");
  switch (spec.kind) {
    case ProbeKind::kCoherent:
      check(spec.squeeze_r == 0.0, join(path, "squeeze_r"),
            "must be 0 for a coherent probe");
      break;
    case ProbeKind::kSqueezedVacuum:
      check(std::abs(spec.nbar - squeezed) <= 1e-9, join(path, "nbar"),
            fmt::format("must equal sinh^2(squeeze_r) = {} for squeezed-vacuum",
                        squeezed));
      break;
    case ProbeKind::kSqueezedCoherent:
      check(spec.nbar >= squeezed - 1e-9, join(path, "nbar"),
            fmt::format("must be >= sinh^2(squeeze_r) = {}", squeezed));
      break;
  }
  NamedProbe probe;
  probe.spec = spec;
  probe.label = text(j, "label", path, std::string(to_string(spec.kind)));
  for (char& c : probe.label)
    if (c == '-') c = '_';
  check(!probe.label.empty() &&
            probe.label.find_first_of(",\n\r\" ") == std::string::npos,
        join(path, "label"), "must be non-empty without commas, quotes or spaces");
  return probe;
}

}  // namespace

RunConfig demo_config() {
  RunConfig cfg;
  cfg.sweep.probes = {
      {"coherent", ProbeSpec::coherent(4.0)},
      {"squeezed_coherent", ProbeSpec::squeezed_coherent(4.0, 0.5, std::numbers::pi / 2)},
      {"squeezed_vacuum", ProbeSpec::squeezed_vacuum(std::asinh(2.0), 0.0)},
  };
  return cfg;
}

RunConfig parse_config_json(const json& doc,
                            const std::filesystem::path& base_dir) {
  as_object(doc, "<root>");
  check_keys(doc, "", {"slit", "theta_name", "theta_grid", "probes", "phi_ref",
                       "eta_mode", "fd_step", "q_window", "point",
                       "oracle_check", "output", "workers", "seed"});
  RunConfig cfg = demo_config();
  if (doc.contains("slit")) parse_slit(doc.at("slit"), base_dir, cfg);

  try {
    cfg.sweep.slit.theta_name =
        theta_name_from_string(text(doc, "theta_name", "", "width"));
  } catch (const Error&) {
    throw ConfigError("theta_name", "expected 'width' or 'n_out'");
  }

  if (doc.contains("theta_grid")) {
    const json& g = as_object(doc.at("theta_grid"), "theta_grid");
    check_keys(g, "theta_grid", {"min", "max", "points"});
    cfg.sweep.grid.min = number(g, "min", "theta_grid", cfg.sweep.grid.min);
    cfg.sweep.grid.max = number(g, "max", "theta_grid", cfg.sweep.grid.max);
    cfg.sweep.grid.points = integer(g, "points", "theta_grid", cfg.sweep.grid.points);
  } else if (cfg.sweep.slit.theta_name == ThetaName::kNOut) {
    cfg.sweep.grid = {1.0, 1.5, 101};
  }
  check(cfg.sweep.grid.min < cfg.sweep.grid.max, "theta_grid.max",
        "must exceed theta_grid.min");
  check(cfg.sweep.grid.points >= 3, "theta_grid.points", "must be >= 3");

  if (doc.contains("probes")) {
    const json& p = doc.at("probes");
    check(p.is_array() && !p.empty(), "probes", "expected a non-empty array");
    cfg.sweep.probes.clear();
    std::set<std::string> labels;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string path = fmt::format("probes[{}]", i);
      cfg.sweep.probes.push_back(parse_probe(p[i], path));
      check(labels.insert(cfg.sweep.probes.back().label).second,
            path + ".label", "duplicate probe label");
    }
  }

  cfg.sweep.phi_ref = number(doc, "phi_ref", "", cfg.sweep.phi_ref);

  if (doc.contains("eta_mode")) {
    const json& e = as_object(doc.at("eta_mode"), "eta_mode");
    check_keys(e, "eta_mode", {"kind", "fixed"});
    const std::string kind = text(e, "kind", "eta_mode",
                                  e.contains("fixed") ? "fixed" : "model");
    if (kind == "model") cfg.sweep.eta.mode = EtaSetting::Mode::kModel;
    else if (kind == "fixed") cfg.sweep.eta.mode = EtaSetting::Mode::kFixed;
    else throw ConfigError("eta_mode.kind", "expected 'model' or 'fixed'");
    cfg.sweep.eta.fixed = number(e, "fixed", "eta_mode", cfg.sweep.eta.fixed);
    check(cfg.sweep.eta.fixed > 0.0 && cfg.sweep.eta.fixed <= 1.0,
          "eta_mode.fixed", "must lie in (0, 1]");
  }

  cfg.sweep.fd_step = number(doc, "fd_step", "", cfg.sweep.fd_step);
  check(cfg.sweep.fd_step > 0.0, "fd_step", "must be > 0");

  if (doc.contains("q_window")) {
    const json& w = as_object(doc.at("q_window"), "q_window");
    check_keys(w, "q_window", {"lo", "hi"});
    cfg.sweep.q_window.lo = number(w, "lo", "q_window", cfg.sweep.q_window.lo);
    cfg.sweep.q_window.hi = number(w, "hi", "q_window", cfg.sweep.q_window.hi);
  }
  check(cfg.sweep.q_window.lo > 0.0, "q_window.lo", "must be > 0");
  check(cfg.sweep.q_window.hi > cfg.sweep.q_window.lo, "q_window.hi",
        "must exceed q_window.lo");

  if (doc.contains("point")) {
    const json& p = as_object(doc.at("point"), "point");
    check_keys(p, "point", {"theta"});
    cfg.point_theta = number(p, "theta", "point", cfg.point_theta);
  } else {
    cfg.point_theta = 0.5 * (cfg.sweep.grid.min + cfg.sweep.grid.max);
  }

  if (doc.contains("oracle_check")) {
    const std::string path = "oracle_check";
    const json& o = as_object(doc.at(path), path);
    check_keys(o, path, {"tolerance", "cutoff", "fd_step", "gaussian_fd_step",
                         "coherent_nbar", "squeezed_r", "eta", "dphi_dtheta"});
    OracleCheckConfig& oc = cfg.oracle;
    oc.tolerance = number(o, "tolerance", path, oc.tolerance);
    oc.cutoff = integer(o, "cutoff", path, oc.cutoff);
    oc.fd_step = number(o, "fd_step", path, oc.fd_step);
    oc.gaussian_fd_step = number(o, "gaussian_fd_step", path, oc.gaussian_fd_step);
    oc.coherent_nbar = number_list(o, "coherent_nbar", path, oc.coherent_nbar);
    oc.squeezed_r = number_list(o, "squeezed_r", path, oc.squeezed_r);
    oc.eta = number_list(o, "eta", path, oc.eta);
    oc.dphi_dtheta = number_list(o, "dphi_dtheta", path, oc.dphi_dtheta);
    check(oc.tolerance > 0.0, path + ".tolerance", "must be > 0");
    check(oc.cutoff >= 4 && oc.cutoff <= 120, path + ".cutoff",
          "must lie in [4, 120]");
    check(oc.fd_step > 0.0, path + ".fd_step", "must be > 0");
    check(oc.gaussian_fd_step > 0.0, path + ".gaussian_fd_step", "must be > 0");
    for (std::size_t i = 0; i < oc.eta.size(); ++i)
      check(oc.eta[i] > 0.0 && oc.eta[i] <= 1.0,
            fmt::format("{}.eta[{}]", path, i), "must lie in (0, 1]");
    for (std::size_t i = 0; i < oc.coherent_nbar.size(); ++i)
      check(oc.coherent_nbar[i] > 0.0,
            fmt::format("{}.coherent_nbar[{}]", path, i), "must be > 0");
    for (std::size_t i = 0; i < oc.squeezed_r.size(); ++i)
      check(oc.squeezed_r[i] > 0.0, fmt::format("{}.squeezed_r[{}]", path, i),
            "must be > 0");
  }

  if (doc.contains("output")) {
    const json& o = as_object(doc.at("output"), "output");
    check_keys(o, "output", {"dir", "csv", "report", "config_echo"});
    cfg.output.dir = text(o, "dir", "output", cfg.output.dir);
    cfg.output.csv = text(o, "csv", "output", cfg.output.csv);
    cfg.output.report = text(o, "report", "output", cfg.output.report);
    cfg.output.config_echo = text(o, "config_echo", "output", cfg.output.config_echo);
  }

  cfg.workers = integer(doc, "workers", "", cfg.workers);
  check(cfg.workers >= 1, "workers", "must be >= 1");
  if (doc.contains("seed")) {
    check(doc.at("seed").is_number_unsigned(), "seed",
          "expected a non-negative integer");
    cfg.seed = doc.at("seed").get<unsigned long long>();
  }

  try {
    cfg.sweep.validate();
  } catch (const Error& e) {
    throw ConfigError("slit", e.what());
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileMissing(fmt::format("cannot open config file '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", fmt::format("invalid JSON: {}", e.what()));
  }
  return parse_config_json(doc, path.parent_path());
}

json to_json(const RunConfig& cfg) {
  const SweepConfig& s = cfg.sweep;
  json slit = {
      {"w", s.slit.w},
      {"t", s.slit.t},
      {"n_out", s.slit.n_out},
      {"lambda0", s.slit.lambda0},
      {"mirror_r0", s.slit.mirror_r0},
      {"tau", s.slit.tau},
  };
  if (const auto* toy = std::get_if<ToyDispersion>(&s.slit.dispersion)) {
    slit["dispersion"] = {{"variant", "toy"},        {"a_len", toy->a_len},
                          {"b_end", toy->b_end},     {"w0", toy->w0},
                          {"s_width", toy->s_width}, {"phi0", toy->phi0}};
  } else {
    slit["dispersion"] = {{"variant", "tabulated"}, {"path", cfg.dispersion_table}};
  }
  json probes = json::array();
  for (const auto& p : s.probes) {
    probes.push_back({{"label", p.label},
                      {"kind", std::string(to_string(p.spec.kind))},
                      {"nbar", p.spec.nbar},
                      {"squeeze_r", p.spec.squeeze_r},
                      {"squeeze_angle", p.spec.squeeze_angle},
                      {"coherent_phase", p.spec.coherent_phase}});
  }
  return {
      {"slit", slit},
      {"theta_name", std::string(to_string(s.slit.theta_name))},
      {"theta_grid", {{"min", s.grid.min}, {"max", s.grid.max}, {"points", s.grid.points}}},
      {"probes", probes},
      {"phi_ref", s.phi_ref},
      {"eta_mode",
       {{"kind", s.eta.mode == EtaSetting::Mode::kFixed ? "fixed" : "model"},
        {"fixed", s.eta.fixed}}},
      {"fd_step", s.fd_step},
      {"q_window", {{"lo", s.q_window.lo}, {"hi", s.q_window.hi}}},
      {"point", {{"theta", cfg.point_theta}}},
      {"oracle_check",
       {{"tolerance", cfg.oracle.tolerance},
        {"cutoff", cfg.oracle.cutoff},
        {"fd_step", cfg.oracle.fd_step},
        {"gaussian_fd_step", cfg.oracle.gaussian_fd_step},
        {"coherent_nbar", cfg.oracle.coherent_nbar},
        {"squeezed_r", cfg.oracle.squeezed_r},
        {"eta", cfg.oracle.eta},
        {"dphi_dtheta", cfg.oracle.dphi_dtheta}}},
      {"output",
       {{"dir", cfg.output.dir},
        {"csv", cfg.output.csv},
        {"report", cfg.output.report},
        {"config_echo", cfg.output.config_echo}}},
      {"workers", cfg.workers},
      {"seed", cfg.seed},
  };
}

}  // namespace slitqfi::app
