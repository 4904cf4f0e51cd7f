#pragma once

// Gaussian optical states in the quadrature picture.
//
// Conventions: x = a + a^dagger, p = -i (a - a^dagger), ordering
// (x_0, p_0, x_1, p_1, ...). The vacuum covariance is the identity and a
// coherent amplitude alpha sits at (2 Re alpha, 2 Im alpha). Modes are
// addressed with zero-based indices.

#include <Eigen/Dense>
#include <complex>
#include <string_view>

namespace slitqfi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;

class GaussianState {
 public:
  // Checks shape and symmetry (max asymmetry 1e-12); physicality is checked
  // separately with min_uncertainty_eigenvalue.
  GaussianState(Vector mean, Matrix covariance);

  int modes() const { return static_cast<int>(mean_.size() / 2); }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }

  Eigen::Vector2d mode_mean(int mode) const;
  Eigen::Matrix2d mode_covariance(int mode) const;

 private:
  Vector mean_;
  Matrix covariance_;
};

// Block-diagonal [[0, 1], [-1, 0]] over `modes` modes.
Matrix symplectic_form(int modes);

// R(phi) implementing a -> e^{i phi} a on one mode.
Eigen::Matrix2d rotation(double phi);

GaussianState vacuum_state(int modes);
GaussianState displace(const GaussianState& state, int mode, Complex alpha);
GaussianState squeeze(const GaussianState& state, int mode, double r,
                      double angle);
GaussianState phase_shift(const GaussianState& state, int mode, double phi);
GaussianState beam_splitter(const GaussianState& state, int mode_a, int mode_b,
                            double transmittance);
// a -> sqrt(eta) e^{i phi} a + sqrt(1 - eta) v with v in vacuum.
GaussianState phase_loss_channel(const GaussianState& state, int mode,
                                 double phi, double eta);
double mean_photon(const GaussianState& state, int mode);

// Full-size symplectic matrices of the lossless operations above.
Matrix squeeze_matrix(int modes, int mode, double r, double angle);
Matrix phase_shift_matrix(int modes, int mode, double phi);
Matrix beam_splitter_matrix(int modes, int mode_a, int mode_b,
                            double transmittance);

GaussianState apply_symplectic(const GaussianState& state, const Matrix& s);

// Smallest eigenvalue of sigma + i Omega; non-negative for physical states.
double min_uncertainty_eigenvalue(const GaussianState& state);

// Symplectic eigenvalues (moduli of the eigenvalues of i Omega sigma),
// sorted ascending, one per mode. All equal to 1 for pure states.
Vector symplectic_eigenvalues(const Matrix& covariance);

enum class ProbeKind { kCoherent, kSqueezedCoherent, kSqueezedVacuum };

std::string_view to_string(ProbeKind kind);
ProbeKind probe_kind_from_string(std::string_view name);

// Probe description. nbar counts every photon in the probe:
// nbar = |alpha|^2 + sinh^2(r).
struct ProbeSpec {
  ProbeKind kind = ProbeKind::kCoherent;
  double nbar = 0.0;
  double squeeze_r = 0.0;
  double squeeze_angle = 0.0;
  double coherent_phase = 0.0;

  static ProbeSpec coherent(double nbar, double phase = 0.0);
  static ProbeSpec squeezed_coherent(double nbar, double r, double angle,
                                     double phase = 0.0);
  static ProbeSpec squeezed_vacuum(double r, double angle = 0.0);

  // Throws kInvalidArgument when the fields are inconsistent.
  void validate() const;
  Complex coherent_amplitude() const;
};

// Single-mode probe: squeezing first, then displacement.
GaussianState prepare_probe(const ProbeSpec& probe);

}  // namespace slitqfi
