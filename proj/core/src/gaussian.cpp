#include "slitqfi/gaussian.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "slitqfi/error.hpp"

namespace slitqfi {
namespace {

void check_mode(const GaussianState& state, int mode) {
  require(mode >= 0 && mode < state.modes(), ErrorCode::kInvalidArgument,
          fmt::format("mode {} out of range for a {}-mode state", mode,
                      state.modes()));
}

}  // namespace

GaussianState::GaussianState(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  require(mean_.size() >= 2 && mean_.size() % 2 == 0,
          ErrorCode::kInvalidArgument,
          "mean vector must have even, non-zero length");
  require(covariance_.rows() == mean_.size() &&
              covariance_.cols() == mean_.size(),
          ErrorCode::kInvalidArgument, "covariance shape mismatch");
  const double asym = (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12, ErrorCode::kInvalidArgument,
          fmt::format("covariance not symmetric (asymmetry {:.3g})", asym));
  // Remove rounding asymmetry so downstream eigen-solvers see exact symmetry.
  covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();
}

Eigen::Vector2d GaussianState::mode_mean(int mode) const {
  check_mode(*this, mode);
  return mean_.segment<2>(2 * mode);
}

Eigen::Matrix2d GaussianState::mode_covariance(int mode) const {
  check_mode(*this, mode);
  return covariance_.block<2, 2>(2 * mode, 2 * mode);
}

Matrix symplectic_form(int modes) {
  Matrix omega = Matrix::Zero(2 * modes, 2 * modes);
  for (int k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

Eigen::Matrix2d rotation(double phi) {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

GaussianState vacuum_state(int modes) {
  require(modes >= 1, ErrorCode::kInvalidArgument,
          fmt::format("vacuum_state needs at least one mode, got {}", modes));
  return {Vector::Zero(2 * modes), Matrix::Identity(2 * modes, 2 * modes)};
}

GaussianState apply_symplectic(const GaussianState& state, const Matrix& s) {
  require(s.rows() == state.mean().size() && s.cols() == s.rows(),
          ErrorCode::kInvalidArgument, "symplectic matrix shape mismatch");
  Matrix sigma = s * state.covariance() * s.transpose();
  return {s * state.mean(), 0.5 * (sigma + sigma.transpose())};
}

GaussianState displace(const GaussianState& state, int mode, Complex alpha) {
  check_mode(state, mode);
  Vector d = state.mean();
  d(2 * mode) += 2.0 * alpha.real();
  d(2 * mode + 1) += 2.0 * alpha.imag();
  return {std::move(d), state.covariance()};
}

Matrix squeeze_matrix(int modes, int mode, double r, double angle) {
  require(r >= 0.0, ErrorCode::kInvalidArgument,
          fmt::format("squeezing parameter must be >= 0, got {}", r));
  require(mode >= 0 && mode < modes, ErrorCode::kInvalidArgument,
          fmt::format("mode {} out of range", mode));
  const Eigen::Matrix2d rot = rotation(angle);
  const Eigen::Matrix2d diag =
      Eigen::Vector2d(std::exp(-r), std::exp(r)).asDiagonal();
  Matrix s = Matrix::Identity(2 * modes, 2 * modes);
  s.block<2, 2>(2 * mode, 2 * mode) = rot * diag * rot.transpose();
  return s;
}

GaussianState squeeze(const GaussianState& state, int mode, double r,
                      double angle) {
  check_mode(state, mode);
  return apply_symplectic(state, squeeze_matrix(state.modes(), mode, r, angle));
}

Matrix phase_shift_matrix(int modes, int mode, double phi) {
  require(mode >= 0 && mode < modes, ErrorCode::kInvalidArgument,
          fmt::format("mode {} out of range", mode));
  Matrix s = Matrix::Identity(2 * modes, 2 * modes);
  s.block<2, 2>(2 * mode, 2 * mode) = rotation(phi);
  return s;
}

GaussianState phase_shift(const GaussianState& state, int mode, double phi) {
  check_mode(state, mode);
  return apply_symplectic(state, phase_shift_matrix(state.modes(), mode, phi));
}

Matrix beam_splitter_matrix(int modes, int mode_a, int mode_b,
                            double transmittance) {
  require(mode_a != mode_b, ErrorCode::kInvalidArgument,
          "beam splitter needs two distinct modes");
  require(mode_a >= 0 && mode_a < modes && mode_b >= 0 && mode_b < modes,
          ErrorCode::kInvalidArgument, "beam splitter mode out of range");
  require(transmittance >= 0.0 && transmittance <= 1.0,
          ErrorCode::kInvalidArgument,
          fmt::format("transmittance {} outside [0, 1]", transmittance));
  const double t = std::sqrt(transmittance);
  const double r = std::sqrt(1.0 - transmittance);
  // a_a -> t a_a + r a_b,  a_b -> r a_a - t a_b (real mixing on x and p).
  Matrix s = Matrix::Identity(2 * modes, 2 * modes);
  const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();
  s.block<2, 2>(2 * mode_a, 2 * mode_a) = t * eye;
  s.block<2, 2>(2 * mode_a, 2 * mode_b) = r * eye;
  s.block<2, 2>(2 * mode_b, 2 * mode_a) = r * eye;
  s.block<2, 2>(2 * mode_b, 2 * mode_b) = -t * eye;
  return s;
}

GaussianState beam_splitter(const GaussianState& state, int mode_a, int mode_b,
                            double transmittance) {
  return apply_symplectic(
      state, beam_splitter_matrix(state.modes(), mode_a, mode_b, transmittance));
}

GaussianState phase_loss_channel(const GaussianState& state, int mode,
                                 double phi, double eta) {
  check_mode(state, mode);
  require(eta >= 0.0 && eta <= 1.0, ErrorCode::kInvalidArgument,
          fmt::format("transmissivity {} outside [0, 1]", eta));
  const int n = 2 * state.modes();
  Matrix x = Matrix::Identity(n, n);
  x.block<2, 2>(2 * mode, 2 * mode) = std::sqrt(eta) * rotation(phi);
  Matrix sigma = x * state.covariance() * x.transpose();
  sigma.block<2, 2>(2 * mode, 2 * mode) +=
      (1.0 - eta) * Eigen::Matrix2d::Identity();
  return {x * state.mean(), 0.5 * (sigma + sigma.transpose())};
}

double mean_photon(const GaussianState& state, int mode) {
  const Eigen::Vector2d d = state.mode_mean(mode);
  const Eigen::Matrix2d s = state.mode_covariance(mode);
  return (s(0, 0) + s(1, 1) + d.squaredNorm()) / 4.0 - 0.5;
}

double min_uncertainty_eigenvalue(const GaussianState& state) {
  const Matrix omega = symplectic_form(state.modes());
  Eigen::MatrixXcd h = state.covariance().cast<Complex>();
  h += Complex(0.0, 1.0) * omega.cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Vector symplectic_eigenvalues(const Matrix& covariance) {
  const int n = static_cast<int>(covariance.rows());
  // Omega sigma has eigenvalues +-i nu_k.
  Eigen::EigenSolver<Matrix> solver(symplectic_form(n / 2) * covariance,
                                    false);
  std::vector<double> moduli;
  moduli.reserve(n);
  for (int i = 0; i < n; ++i) moduli.push_back(std::abs(solver.eigenvalues()(i)));
  std::sort(moduli.begin(), moduli.end());
  Vector nu(n / 2);
  for (int k = 0; k < n / 2; ++k) nu(k) = 0.5 * (moduli[2 * k] + moduli[2 * k + 1]);
  return nu;
}

std::string_view to_string(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::kCoherent: return "coherent";
    case ProbeKind::kSqueezedCoherent: return "squeezed-coherent";
    case ProbeKind::kSqueezedVacuum: return "squeezed-vacuum";
  }
  return "unknown";
}

ProbeKind probe_kind_from_string(std::string_view name) {
  if (name == "coherent") return ProbeKind::kCoherent;
  if (name == "squeezed-coherent") return ProbeKind::kSqueezedCoherent;
  if (name == "squeezed-vacuum") return ProbeKind::kSqueezedVacuum;
  fail(ErrorCode::kInvalidArgument, fmt::format("unknown probe kind '{}'", name));
}

ProbeSpec ProbeSpec::coherent(double nbar, double phase) {
  ProbeSpec p{ProbeKind::kCoherent, nbar, 0.0, 0.0, phase};
  p.validate();
  return p;
}

ProbeSpec ProbeSpec::squeezed_coherent(double nbar, double r, double angle,
                                       double phase) {
  ProbeSpec p{ProbeKind::kSqueezedCoherent, nbar, r, angle, phase};
  p.validate();
  return p;
}

ProbeSpec ProbeSpec::squeezed_vacuum(double r, double angle) {
  const double sh = std::sinh(r);
  ProbeSpec p{ProbeKind::kSqueezedVacuum, sh * sh, r, angle, 0.0};
  p.validate();
  return p;
}

void ProbeSpec::validate() const {
  require(std::isfinite(nbar) && nbar >= 0.0, ErrorCode::kInvalidArgument,
          fmt::format("probe nbar must be >= 0, got {}", nbar));
  require(std::isfinite(squeeze_r) && squeeze_r >= 0.0,
          ErrorCode::kInvalidArgument,
          fmt::format("probe squeeze_r must be >= 0, got {}", squeeze_r));
  const double squeezed_photons = std::sinh(squeeze_r) * std::sinh(squeeze_r);
  switch (kind) {
    case ProbeKind::kCoherent:
      require(squeeze_r == 0.0, ErrorCode::kInvalidArgument,
              "coherent probe must have squeeze_r = 0");
      break;
    case ProbeKind::kSqueezedVacuum:
      require(std::abs(nbar - squeezed_photons) <= 1e-9,
              ErrorCode::kInvalidArgument,
              fmt::format("squeezed-vacuum probe needs nbar = sinh^2(r) = {}, "
                          "got {}",
                          squeezed_photons, nbar));
      break;
    case ProbeKind::kSqueezedCoherent:
      require(nbar >= squeezed_photons - 1e-9, ErrorCode::kInvalidArgument,
              fmt::format("squeezed-coherent probe needs nbar >= sinh^2(r) = "
                          "{}, got {}",
                          squeezed_photons, nbar));
      break;
  }
}

Complex ProbeSpec::coherent_amplitude() const {
  if (kind == ProbeKind::kSqueezedVacuum) return {0.0, 0.0};
  const double sh = std::sinh(squeeze_r);
  const double coherent_photons = std::max(0.0, nbar - sh * sh);
  return std::polar(std::sqrt(coherent_photons), coherent_phase);
}

GaussianState prepare_probe(const ProbeSpec& probe) {
  probe.validate();
  GaussianState state = vacuum_state(1);
  if (probe.squeeze_r > 0.0)
    state = squeeze(state, 0, probe.squeeze_r, probe.squeeze_angle);
  return displace(state, 0, probe.coherent_amplitude());
}

}  // namespace slitqfi
