#pragma once

// Quantum and classical Fisher information for Gaussian state families
// produced by the phase-and-loss channel, alone or inside a Mach-Zehnder
// interferometer.

#include <functional>
#include <string_view>
#include <utility>

#include "slitqfi/gaussian.hpp"
#include "slitqfi/slit_model.hpp"

namespace slitqfi {

// theta -> state. Evaluators must be deterministic and safe to call
// concurrently; they are only queried inside [theta_lo, theta_hi].
struct StateFamily {
  std::function<GaussianState(double)> evaluator;
  double theta_lo = 0.0;
  double theta_hi = 0.0;

  GaussianState operator()(double theta) const { return evaluator(theta); }
};

// Post-composes every member of the family with a theta-independent map.
StateFamily map_family(StateFamily family,
                       std::function<GaussianState(const GaussianState&)> op);

enum class FisherMethod { kClosedForm, kGaussianGeneral, kOracle };

std::string_view to_string(FisherMethod method);

struct FisherReport {
  double theta = 0.0;
  double qfi = 0.0;
  FisherMethod method = FisherMethod::kClosedForm;
  double fd_step = 0.0;     // step actually used for the derivatives
  bool pure_branch = false;  // gaussian-general only
};

// Minimal variance 1 / (nu F). Returns +infinity when qfi <= 0 (no
// information); throws kInvalidArgument for nu = 0.
double crb_bound(double qfi, unsigned nu);

// Exact coherent-state channel value 4 nbar [eta phi'^2 + eta'^2 / (4 eta)].
FisherReport coherent_qfi(double nbar, const FPChannelPoint& point);

// First and second moments of a family and their theta-derivatives
// (central differences with one Richardson step).
//
// fd_step is the starting step. It is enlarged, within the family's domain,
// until the moments move by at least 1e-4 relative between theta - h and
// theta + h; below that the difference quotient is dominated by rounding
// when the family varies slowly.
struct FamilyDerivative {
  GaussianState state;
  Vector dmean;
  Matrix dcovariance;
  double step = 0.0;
};

FamilyDerivative differentiate_family(const StateFamily& family, double theta,
                                      double fd_step);

FisherReport gaussian_qfi(const StateFamily& family, double theta,
                          double fd_step = 1e-5);

// Single-mode probe through the phase-and-loss channel with (phi, eta)
// linearised around the working point.
StateFamily build_channel_output(const ProbeSpec& probe,
                                 const FPChannelPoint& point,
                                 double fd_step = 1e-5);

// Two-mode MZI: coherent light in port 0, squeezed vacuum in port 1 for the
// squeezed kinds; 50:50 splitter, channel on arm 0, phase_shift(phi_ref) on
// arm 1, 50:50 splitter. Throws kLinearizationInvalid when the clamped
// transmissivity would be reached within fd_step of the working point.
StateFamily build_mzi_output(const ProbeSpec& probe, const FPChannelPoint& point,
                             double phi_ref, double fd_step = 1e-5);

double homodyne_fi(const StateFamily& family, double theta, int mode,
                   double quad_angle, double fd_step = 1e-5);

struct HomodyneOptimum {
  double angle = 0.0;  // in [0, pi)
  double fi = 0.0;
};

HomodyneOptimum optimal_homodyne_fi(const StateFamily& family, double theta,
                                    int mode, double fd_step = 1e-5);

// Poisson counting statistics with mean lambda(theta).
double counting_fi(double mean_counts, double d_mean_counts);

// Difference photocurrent of the two MZI ports with shot-noise variance
// mu_0 + mu_1. Coherent probes only.
double balanced_detection_fi(const ProbeSpec& probe, const FPChannelPoint& point,
                             double phi_ref, double fd_step = 1e-5);

}  // namespace slitqfi
