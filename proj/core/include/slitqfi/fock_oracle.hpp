#pragma once

// Brute-force single-mode oracle in a truncated number basis |0>..|N-1>.
// Used to cross-check every Gaussian-formula result at small photon number.

#include <Eigen/Dense>
#include <functional>

#include "slitqfi/gaussian.hpp"
#include "slitqfi/slit_model.hpp"

namespace slitqfi {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct FockOperators {
  int cutoff = 0;
  ComplexMatrix a;      // <n-1| a |n> = sqrt(n)
  ComplexMatrix n_hat;  // diag(0, ..., N-1)

  static FockOperators make(int cutoff);
};

class FockDensityMatrix {
 public:
  // Requires a square matrix Hermitian within 1e-12; the residual
  // anti-Hermitian part is dropped.
  explicit FockDensityMatrix(ComplexMatrix rho);

  static FockDensityMatrix vacuum(int cutoff);
  static FockDensityMatrix pure(const ComplexVector& ket);

  int cutoff() const { return static_cast<int>(rho_.rows()); }
  const ComplexMatrix& rho() const { return rho_; }
  double trace() const { return rho_.trace().real(); }
  double min_eigenvalue() const;

 private:
  ComplexMatrix rho_;
};

// D(alpha) S(xi) |0><0| S^dagger D^dagger with xi = r e^{2 i angle}, so that
// the squeezed quadrature matches gaussian_core's squeeze(r, angle). The
// exponentials are taken in a padded space and truncated to `cutoff`.
// Throws kTruncation when the leakage exceeds 1e-8.
FockDensityMatrix prepare_probe_fock(const ProbeSpec& probe, int cutoff);

// Phase unitary e^{i phi n} followed by the loss Kraus map
// K_k = sqrt((1-eta)^k / k!) eta^{n/2} a^k.
FockDensityMatrix apply_phase_loss_fock(const FockDensityMatrix& rho,
                                        double phi, double eta);

using FockFamily = std::function<FockDensityMatrix(double)>;

// F = 2 sum_{i,j: l_i + l_j > 1e-12} |<i|d rho|j>|^2 / (l_i + l_j), with
// d rho from central differences plus one Richardson step.
double sld_qfi(const FockFamily& family, double theta, double fd_step = 1e-4);

// max(1 - Tr rho, population of the three highest levels).
double truncation_error(const FockDensityMatrix& rho);

// Mirror of build_channel_output in the number basis.
FockFamily fock_channel_family(const ProbeSpec& probe,
                               const FPChannelPoint& point, int cutoff);

struct FockMoments {
  double nbar = 0.0;
  double mean_x = 0.0;
  double mean_p = 0.0;
  double var_x = 0.0;
  double var_p = 0.0;
};

FockMoments fock_moments(const FockDensityMatrix& rho);

// <psi| rho |psi> for a normalised ket of matching dimension.
double fidelity_with_pure(const FockDensityMatrix& rho, const ComplexVector& psi);

// Coherent-state ket truncated to `cutoff` levels.
ComplexVector coherent_ket(Complex alpha, int cutoff);

// (1/2) || a - b ||_1.
double trace_distance(const FockDensityMatrix& a, const FockDensityMatrix& b);

}  // namespace slitqfi
