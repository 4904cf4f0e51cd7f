#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "slitqfi/error.hpp"
#include "slitqfi/fock_oracle.hpp"
#include "slitqfi/gaussian.hpp"

namespace slitqfi::testing {

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Random composition of displacements, squeezers (r <= 1.5), phase shifts,
// beam splitters and phase-loss channels on up to three modes.
inline GaussianState random_circuit(std::mt19937_64& rng, int* modes_out = nullptr) {
  std::uniform_int_distribution<int> mode_count(1, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int modes = mode_count(rng);
  std::uniform_int_distribution<int> pick_mode(0, modes - 1);
  std::uniform_int_distribution<int> pick_op(0, 4);
  std::uniform_int_distribution<int> length(1, 12);

  GaussianState s = vacuum_state(modes);
  const int ops = length(rng);
  for (int k = 0; k < ops; ++k) {
    const int m = pick_mode(rng);
    const double angle = 2.0 * M_PI * unit(rng);
    switch (pick_op(rng)) {
      case 0:
        s = displace(s, m, std::polar(2.0 * unit(rng), angle));
        break;
      case 1:
        s = squeeze(s, m, 1.5 * unit(rng), angle);
        break;
      case 2:
        s = phase_shift(s, m, angle);
        break;
      case 3:
        if (modes > 1) {
          int b = pick_mode(rng);
          if (b == m) b = (m + 1) % modes;
          s = beam_splitter(s, m, b, unit(rng));
        }
        break;
      default:
        s = phase_loss_channel(s, m, angle, unit(rng));
        break;
    }
  }
  if (modes_out) *modes_out = modes;
  return s;
}

// Single-mode probe with random kind and n̄ <= nbar_max; squeezing kept
// modest so that a cutoff of 40-50 captures the state.
inline ProbeSpec random_probe(std::mt19937_64& rng, double nbar_max) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double phase = 2.0 * M_PI * unit(rng);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0:
      return ProbeSpec::coherent(nbar_max * unit(rng), phase);
    case 1: {
      const double r = 0.5 * unit(rng);
      const double sq = std::sinh(r) * std::sinh(r);
      const double nbar = sq + (nbar_max - sq) * unit(rng);
      return ProbeSpec::squeezed_coherent(nbar, r, M_PI * unit(rng), phase);
    }
    default:
      return ProbeSpec::squeezed_vacuum(std::asinh(std::sqrt(nbar_max)) * unit(rng),
                                        M_PI * unit(rng));
  }
}

// Smallest cutoff from 40 upwards whose truncation leakage is below `leak`.
inline int leakage_checked_cutoff(const ProbeSpec& probe, double leak = 1e-10) {
  for (int n = 40;; n += 20) {
    try {
      if (truncation_error(prepare_probe_fock(probe, n)) <= leak) return n;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTruncation) throw;
    }
  }
}

}  // namespace slitqfi::testing
