#include "slitqfi/slit_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "slitqfi/error.hpp"
#include "slitqfi/numerics.hpp"

namespace slitqfi {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Geometry {
  double w;
  double n_out;
};

Geometry geometry_at(const SlitConfig& cfg, double theta) {
  if (cfg.theta_name == ThetaName::kWidth) return {theta, cfg.n_out};
  return {cfg.w, theta};
}

void check_theta(const SlitConfig& cfg, double theta) {
  const auto [lo, hi] = cfg.theta_validity();
  require(theta >= lo && theta <= hi, ErrorCode::kOutOfRange,
          fmt::format("theta = {} outside model range [{}, {}]", theta, lo, hi));
}

// Index i with grid[i] <= x <= grid[i + 1] and the fractional position.
std::pair<std::size_t, double> locate(const std::vector<double>& grid,
                                      double x) {
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
  if (i + 1 >= grid.size()) i = grid.size() - 2;
  return {i, (x - grid[i]) / (grid[i + 1] - grid[i])};
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text, std::size_t line_no,
                    std::string_view column) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  require(used == text.size() && !text.empty() && std::isfinite(value),
          ErrorCode::kParse,
          fmt::format("line {}: column {} is not a finite number: '{}'",
                      line_no, column, text));
  return value;
}

}  // namespace

std::string_view to_string(ThetaName name) {
  return name == ThetaName::kWidth ? "width" : "n_out";
}

ThetaName theta_name_from_string(std::string_view name) {
  if (name == "width") return ThetaName::kWidth;
  if (name == "n_out") return ThetaName::kNOut;
  fail(ErrorCode::kInvalidArgument, fmt::format("unknown theta name '{}'", name));
}

TabulatedDispersion::TabulatedDispersion(std::vector<double> lambdas,
                                         std::vector<double> thetas,
                                         std::vector<double> beta,
                                         std::vector<double> phi_end)
    : lambdas_(std::move(lambdas)),
      thetas_(std::move(thetas)),
      beta_(std::move(beta)),
      phi_end_(std::move(phi_end)) {
  require(lambdas_.size() >= 2 && thetas_.size() >= 2,
          ErrorCode::kInvalidConfig,
          "tabulated dispersion needs at least 2 lambda and 2 theta nodes");
  require(std::adjacent_find(lambdas_.begin(), lambdas_.end(),
                             std::greater_equal<>()) == lambdas_.end(),
          ErrorCode::kInvalidConfig, "lambda grid not strictly increasing");
  require(std::adjacent_find(thetas_.begin(), thetas_.end(),
                             std::greater_equal<>()) == thetas_.end(),
          ErrorCode::kInvalidConfig, "theta grid not strictly increasing");
  const std::size_t n = lambdas_.size() * thetas_.size();
  require(beta_.size() == n && phi_end_.size() == n, ErrorCode::kInvalidConfig,
          "tabulated value count does not match the grid");
  auto finite = [](double v) { return std::isfinite(v); };
  require(std::all_of(beta_.begin(), beta_.end(), finite) &&
              std::all_of(phi_end_.begin(), phi_end_.end(), finite),
          ErrorCode::kInvalidConfig, "tabulated values must be finite");
}

TabulatedDispersion TabulatedDispersion::from_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse,
          "line 1: missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "lambda_nm,theta,beta_rad_per_nm,phi_end_rad",
          ErrorCode::kParse,
          fmt::format("line 1: expected header "
                      "'lambda_nm,theta,beta_rad_per_nm,phi_end_rad', got '{}'",
                      line));

  std::vector<double> lambdas;
  std::vector<double> thetas;
  std::vector<double> beta;
  std::vector<double> phi_end;
  std::size_t theta_index = 0;
  bool first_block = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    require(fields.size() == 4, ErrorCode::kParse,
            fmt::format("line {}: expected 4 fields, got {}", line_no,
                        fields.size()));
    const double lambda = parse_number(fields[0], line_no, "lambda_nm");
    const double theta = parse_number(fields[1], line_no, "theta");
    beta.push_back(parse_number(fields[2], line_no, "beta_rad_per_nm"));
    phi_end.push_back(parse_number(fields[3], line_no, "phi_end_rad"));

    if (lambdas.empty() || lambda != lambdas.back()) {
      if (!lambdas.empty()) {
        require(lambda > lambdas.back(), ErrorCode::kParse,
                fmt::format("line {}: lambda {} not strictly increasing",
                            line_no, lambda));
        require(theta_index == thetas.size(), ErrorCode::kParse,
                fmt::format("line {}: lambda block {} has {} theta rows, "
                            "expected {}",
                            line_no, lambdas.back(), theta_index,
                            thetas.size()));
        first_block = false;
      }
      lambdas.push_back(lambda);
      theta_index = 0;
    }
    if (first_block) {
      require(thetas.empty() || theta > thetas.back(), ErrorCode::kParse,
              fmt::format("line {}: theta {} not strictly increasing", line_no,
                          theta));
      thetas.push_back(theta);
    } else {
      require(theta_index < thetas.size() && theta == thetas[theta_index],
              ErrorCode::kParse,
              fmt::format("line {}: theta {} does not match the grid of the "
                          "first lambda block",
                          line_no, theta));
    }
    ++theta_index;
  }
  require(!lambdas.empty(), ErrorCode::kParse, "no data rows");
  require(theta_index == thetas.size(), ErrorCode::kParse,
          fmt::format("line {}: last lambda block incomplete", line_no));
  try {
    return {std::move(lambdas), std::move(thetas), std::move(beta),
            std::move(phi_end)};
  } catch (const Error& e) {
    fail(ErrorCode::kParse, e.what());
  }
}

TabulatedDispersion TabulatedDispersion::from_csv_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kParse,
          fmt::format("cannot open dispersion table '{}'", path.string()));
  return from_csv(in);
}

double TabulatedDispersion::interpolate(const std::vector<double>& values,
                                        double lambda, double theta) const {
  require(lambda >= lambdas_.front() && lambda <= lambdas_.back(),
          ErrorCode::kOutOfRange,
          fmt::format("lambda = {} outside table [{}, {}]", lambda,
                      lambdas_.front(), lambdas_.back()));
  require(theta >= thetas_.front() && theta <= thetas_.back(),
          ErrorCode::kOutOfRange,
          fmt::format("theta = {} outside table [{}, {}]", theta,
                      thetas_.front(), thetas_.back()));
  const auto [i, u] = locate(lambdas_, lambda);
  const auto [j, v] = locate(thetas_, theta);
  const std::size_t nt = thetas_.size();
  const double f00 = values[i * nt + j];
  const double f01 = values[i * nt + j + 1];
  const double f10 = values[(i + 1) * nt + j];
  const double f11 = values[(i + 1) * nt + j + 1];
  return (1.0 - u) * ((1.0 - v) * f00 + v * f01) + u * ((1.0 - v) * f10 + v * f11);
}

double TabulatedDispersion::beta(double lambda, double theta) const {
  return interpolate(beta_, lambda, theta);
}

double TabulatedDispersion::phi_end(double lambda, double theta) const {
  return interpolate(phi_end_, lambda, theta);
}

void SlitConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(positive(w), ErrorCode::kInvalidConfig, "slit.w must be > 0");
  require(positive(t), ErrorCode::kInvalidConfig, "slit.t must be > 0");
  require(positive(lambda0), ErrorCode::kInvalidConfig,
          "slit.lambda0 must be > 0");
  require(std::isfinite(n_out) && n_out >= 1.0, ErrorCode::kInvalidConfig,
          "slit.n_out must be >= 1");
  require(w < lambda0, ErrorCode::kInvalidConfig,
          fmt::format("slit.w = {} must be below lambda0 = {}", w, lambda0));
  require(mirror_r0 >= 0.0 && mirror_r0 < 1.0, ErrorCode::kInvalidConfig,
          "slit.mirror_r0 must lie in [0, 1)");
  require(tau > 0.0 && tau <= 1.0, ErrorCode::kInvalidConfig,
          "slit.tau must lie in (0, 1]");
  const double r = mirror_r0 * mirror_r0;
  const double t_peak = std::pow(tau, 4) / ((1.0 - r) * (1.0 - r));
  require(t_peak <= 1.0 + 1e-12, ErrorCode::kInvalidConfig,
          fmt::format("Airy peak transmission tau^4/(1-r0^2)^2 = {} exceeds 1",
                      t_peak));
  if (const auto* toy = std::get_if<ToyDispersion>(&dispersion)) {
    require(std::isfinite(toy->s_width) && toy->s_width > 0.0,
            ErrorCode::kInvalidConfig, "dispersion.s_width must be > 0");
    require(std::isfinite(toy->a_len) && std::isfinite(toy->b_end) &&
                std::isfinite(toy->w0) && std::isfinite(toy->phi0),
            ErrorCode::kInvalidConfig, "dispersion parameters must be finite");
  }
}

std::pair<double, double> SlitConfig::theta_validity() const {
  if (const auto* table = std::get_if<TabulatedDispersion>(&dispersion))
    return table->theta_range();
  if (theta_name == ThetaName::kWidth)
    return {std::nextafter(0.0, 1.0), std::nextafter(lambda0, 0.0)};
  return {1.0, 1e6};
}

double propagation_constant(const SlitConfig& cfg, double lambda,
                            double theta) {
  require(lambda > 0.0, ErrorCode::kInvalidArgument,
          fmt::format("wavelength must be > 0, got {}", lambda));
  if (const auto* table = std::get_if<TabulatedDispersion>(&cfg.dispersion))
    return table->beta(lambda, theta);
  check_theta(cfg, theta);
  const auto& toy = std::get<ToyDispersion>(cfg.dispersion);
  const Geometry g = geometry_at(cfg, theta);
  const double n_eff = g.n_out * (1.0 + toy.a_len / g.w);
  return kTwoPi / lambda * n_eff;
}

double end_phase(const SlitConfig& cfg, double lambda, double theta) {
  require(lambda > 0.0, ErrorCode::kInvalidArgument,
          fmt::format("wavelength must be > 0, got {}", lambda));
  if (const auto* table = std::get_if<TabulatedDispersion>(&cfg.dispersion))
    return table->phi_end(lambda, theta);
  check_theta(cfg, theta);
  const auto& toy = std::get<ToyDispersion>(cfg.dispersion);
  const Geometry g = geometry_at(cfg, theta);
  return toy.phi0 + toy.b_end * std::atan((g.w - toy.w0) / toy.s_width);
}

double round_trip_phase(const SlitConfig& cfg, double lambda, double theta) {
  return 2.0 * propagation_constant(cfg, lambda, theta) * cfg.t +
         2.0 * end_phase(cfg, lambda, theta);
}

double airy_transmission(double phase, double mirror_r0, double tau) {
  const double r = mirror_r0 * mirror_r0;
  const double denom = 1.0 - 2.0 * r * std::cos(phase) + r * r;
  return std::pow(tau, 4) / denom;
}

double transmission(const SlitConfig& cfg, double lambda, double theta) {
  return airy_transmission(round_trip_phase(cfg, lambda, theta), cfg.mirror_r0,
                           cfg.tau);
}

FPChannelPoint channel_point(const SlitConfig& cfg, double theta,
                             double fd_step) {
  require(fd_step > 0.0, ErrorCode::kInvalidArgument, "fd_step must be > 0");
  const auto [lo, hi] = cfg.theta_validity();
  require(theta - fd_step >= lo && theta + fd_step <= hi,
          ErrorCode::kOutOfRange,
          fmt::format("theta = {} closer than fd_step = {} to the model range "
                      "[{}, {}]",
                      theta, fd_step, lo, hi));
  auto phase = [&](double th) { return round_trip_phase(cfg, cfg.lambda0, th); };
  auto eta = [&](double th) { return transmission(cfg, cfg.lambda0, th); };
  const auto dphi = numerics::richardson_derivative(phase, theta, fd_step);
  const auto deta = numerics::richardson_derivative(eta, theta, fd_step);
  FPChannelPoint point;
  point.theta = theta;
  point.phi = phase(theta);
  point.eta = std::clamp(eta(theta), 0.0, 1.0);
  point.dphi_dtheta = dphi.value;
  point.deta_dtheta = deta.value;
  point.theta_name = cfg.theta_name;
  point.dphi_single_step = dphi.single_step;
  point.deta_single_step = deta.single_step;
  return point;
}

ResonanceReport quality_factor(const SlitConfig& cfg, double theta,
                               WavelengthWindow window, int scan_points) {
  require(window.lo > 0.0 && window.hi > window.lo, ErrorCode::kInvalidArgument,
          fmt::format("invalid wavelength window [{}, {}]", window.lo,
                      window.hi));
  require(scan_points >= 5, ErrorCode::kInvalidArgument,
          "scan_points must be >= 5");
  auto spectrum = [&](double lambda) { return transmission(cfg, lambda, theta); };

  const double step = (window.hi - window.lo) / (scan_points - 1);
  std::vector<double> lambdas(scan_points);
  std::vector<double> values(scan_points);
  for (int i = 0; i < scan_points; ++i) {
    lambdas[i] = i + 1 == scan_points ? window.hi : window.lo + i * step;
    values[i] = spectrum(lambdas[i]);
  }
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  require(*max_it - *min_it > 1e-12 * *max_it, ErrorCode::kNoResonance,
          fmt::format("flat spectrum in [{}, {}] nm at theta = {}", window.lo,
                      window.hi, theta));

  // Highest interior local maximum of the scan.
  int peak = -1;
  for (int i = 1; i + 1 < scan_points; ++i) {
    if (values[i] >= values[i - 1] && values[i] > values[i + 1] &&
        (peak < 0 || values[i] > values[peak]))
      peak = i;
  }
  require(peak > 0, ErrorCode::kNoResonance,
          fmt::format("no interior transmission maximum in [{}, {}] nm at "
                      "theta = {}",
                      window.lo, window.hi, theta));

  const auto top = numerics::golden_section_max(spectrum, lambdas[peak - 1],
                                                lambdas[peak + 1], 1e-6);
  const double half = 0.5 * top.value;
  auto minus_half = [&](double lambda) { return spectrum(lambda) - half; };

  int left = peak;
  while (left >= 0 && values[left] >= half) --left;
  int right = peak;
  while (right < scan_points && values[right] >= half) ++right;
  require(left >= 0 && right < scan_points, ErrorCode::kWindowTooNarrow,
          fmt::format("half maximum not bracketed in [{}, {}] nm at theta = {}",
                      window.lo, window.hi, theta));

  const double lambda_left =
      numerics::bisect_root(minus_half, lambdas[left], lambdas[left + 1], 1e-6);
  const double lambda_right =
      numerics::bisect_root(minus_half, lambdas[right - 1], lambdas[right], 1e-6);

  ResonanceReport report;
  report.lambda_res = top.x;
  report.fwhm = lambda_right - lambda_left;
  report.t_peak = top.value;
  report.q_factor = report.lambda_res / report.fwhm;
  return report;
}

}  // namespace slitqfi
