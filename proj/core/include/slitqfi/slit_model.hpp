#pragma once

// Fabry-Perot response of a single-mode subwavelength slit.
//
// All lengths are in nanometres, phases in radians. The estimated parameter
// theta replaces either the slit width or the external index, selected by
// SlitConfig::theta_name.

#include <filesystem>
#include <istream>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace slitqfi {

enum class ThetaName { kWidth, kNOut };

std::string_view to_string(ThetaName name);
ThetaName theta_name_from_string(std::string_view name);

// n_eff = n_out (1 + a_len / w),
// phi_end = phi0 + b_end * atan((w - w0) / s_width).
struct ToyDispersion {
  double a_len = 20.0;
  double b_end = 2.0;
  double w0 = 120.0;
  double s_width = 15.0;
  double phi0 = 0.6;
};

// beta and phi_end sampled on a rectangular (lambda, theta) grid, evaluated
// by bilinear interpolation. Queries outside the grid are rejected.
class TabulatedDispersion {
 public:
  TabulatedDispersion(std::vector<double> lambdas, std::vector<double> thetas,
                      std::vector<double> beta, std::vector<double> phi_end);

  // CSV with header `lambda_nm,theta,beta_rad_per_nm,phi_end_rad`, rows
  // ordered lambda-major with theta increasing inside each lambda block.
  static TabulatedDispersion from_csv(std::istream& in);
  static TabulatedDispersion from_csv_file(const std::filesystem::path& path);

  double beta(double lambda, double theta) const;
  double phi_end(double lambda, double theta) const;

  std::pair<double, double> lambda_range() const {
    return {lambdas_.front(), lambdas_.back()};
  }
  std::pair<double, double> theta_range() const {
    return {thetas_.front(), thetas_.back()};
  }
  const std::vector<double>& lambdas() const { return lambdas_; }
  const std::vector<double>& thetas() const { return thetas_; }

 private:
  double interpolate(const std::vector<double>& values, double lambda,
                     double theta) const;

  std::vector<double> lambdas_;
  std::vector<double> thetas_;
  std::vector<double> beta_;     // lambda-major, size lambdas * thetas
  std::vector<double> phi_end_;  // same layout
};

using DispersionModel = std::variant<ToyDispersion, TabulatedDispersion>;

struct SlitConfig {
  double w = 120.0;
  double t = 300.0;
  double n_out = 1.0;
  double lambda0 = 650.0;
  DispersionModel dispersion = ToyDispersion{};
  double mirror_r0 = 0.85;
  double tau = 0.5;
  ThetaName theta_name = ThetaName::kWidth;

  // Throws kInvalidConfig (geometry, Airy peak above 1, ...).
  void validate() const;
  // Interval of theta values the dispersion model accepts.
  std::pair<double, double> theta_validity() const;
};

struct FPChannelPoint {
  double theta = 0.0;
  double phi = 0.0;  // unwrapped round-trip phase at lambda0
  double eta = 1.0;
  double dphi_dtheta = 0.0;
  double deta_dtheta = 0.0;
  ThetaName theta_name = ThetaName::kWidth;
  // Plain central differences at fd_step / 2, kept for step-size checks.
  double dphi_single_step = 0.0;
  double deta_single_step = 0.0;
};

struct ResonanceReport {
  double lambda_res = 0.0;
  double fwhm = 0.0;
  double q_factor = 0.0;
  double t_peak = 0.0;
};

double propagation_constant(const SlitConfig& cfg, double lambda, double theta);
double end_phase(const SlitConfig& cfg, double lambda, double theta);
double round_trip_phase(const SlitConfig& cfg, double lambda, double theta);

// Airy transmission tau^4 / |1 - r0^2 e^{i Phi}|^2.
double airy_transmission(double phase, double mirror_r0, double tau);
double transmission(const SlitConfig& cfg, double lambda, double theta);

FPChannelPoint channel_point(const SlitConfig& cfg, double theta,
                             double fd_step = 1e-5);

struct WavelengthWindow {
  double lo = 0.0;
  double hi = 0.0;
};

// Locates the transmission peak inside `window` (coarse scan, then
// golden-section to 1e-6 nm) and its half-maximum crossings (bisection to
// 1e-6 nm). Throws kNoResonance or kWindowTooNarrow.
ResonanceReport quality_factor(const SlitConfig& cfg, double theta,
                               WavelengthWindow window, int scan_points = 4001);

}  // namespace slitqfi
