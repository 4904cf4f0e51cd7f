#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "slitqfi/error.hpp"
#include "slitqfi/fock_oracle.hpp"
#include "slitqfi/metrology.hpp"
#include "testing.hpp"

namespace slitqfi {
namespace {

using testing::rel_diff;

FockFamily phase_encoded(const FockDensityMatrix& rho) {
  return [rho](double theta) { return apply_phase_loss_fock(rho, theta, 1.0); };
}

FockDensityMatrix random_density(std::mt19937_64& rng, int n, int support) {
  std::normal_distribution<double> g;
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < support; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  ComplexMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return FockDensityMatrix(0.5 * (rho + rho.adjoint()));
}

TEST(FockOperators, LadderEntries) {
  const FockOperators ops = FockOperators::make(6);
  for (int n = 1; n < 6; ++n) EXPECT_EQ(ops.a(n - 1, n), Complex(std::sqrt(double(n)), 0.0));
  EXPECT_EQ(ops.a.cwiseAbs().sum(), [] {
    double s = 0;
    for (int n = 1; n < 6; ++n) s += std::sqrt(double(n));
    return s;
  }());
  for (int n = 0; n < 6; ++n) EXPECT_EQ(ops.n_hat(n, n), Complex(n, 0.0));
}

TEST(PrepareProbeFock, Examples) {
  const FockDensityMatrix vac = prepare_probe_fock(ProbeSpec::coherent(0.0), 10);
  EXPECT_NEAR(std::abs(vac.rho()(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(vac.rho().cwiseAbs().sum(), 1.0, 1e-15);
  EXPECT_NEAR(fock_moments(prepare_probe_fock(ProbeSpec::coherent(1.0), 30)).nbar, 1.0, 1e-9);
  const FockDensityMatrix sv = prepare_probe_fock(ProbeSpec::squeezed_vacuum(0.5), 40);
  EXPECT_NEAR(fock_moments(sv).nbar, 0.2715403, 1e-7);
  EXPECT_NEAR(fock_moments(sv).nbar, std::pow(std::sinh(0.5), 2), 1e-8);
}

TEST(PrepareProbeFock, CoherentAmplitudesArePoissonian) {
  const Complex alpha(0.8, -0.5);
  const FockDensityMatrix rho = prepare_probe_fock(ProbeSpec::coherent(std::norm(alpha), std::arg(alpha)), 30);
  EXPECT_GT(fidelity_with_pure(rho, coherent_ket(alpha, 30)), 1 - 1e-12);
}

TEST(PrepareProbeFock, RejectsLeakyCutoff) {
  try {
    prepare_probe_fock(ProbeSpec::coherent(25.0), 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTruncation);
    EXPECT_NE(std::string(e.what()).find("cutoff"), std::string::npos);
  }
}

TEST(PhaseLossFock, UnitaryLimit) {
  std::mt19937_64 rng(1);
  const FockDensityMatrix rho = random_density(rng, 8, 3);
  const double phi = 0.9;
  const FockDensityMatrix out = apply_phase_loss_fock(rho, phi, 1.0);
  for (int n = 0; n < 8; ++n)
    for (int m = 0; m < 8; ++m)
      ASSERT_LT(std::abs(out.rho()(n, m) - std::polar(1.0, phi * (n - m)) * rho.rho()(n, m)), 1e-14);
}

TEST(PhaseLossFock, FullLossIsVacuum) {
  std::mt19937_64 rng(2);
  const FockDensityMatrix out = apply_phase_loss_fock(random_density(rng, 8, 4), 0.3, 0.0);
  EXPECT_LT(trace_distance(out, FockDensityMatrix::vacuum(8)), 1e-14);
  EXPECT_THROW(apply_phase_loss_fock(FockDensityMatrix::vacuum(4), 0.0, -0.01), Error);
}

TEST(PhaseLossFock, PreservesTraceOnEveryBasisState) {
  // Loss only lowers photon number, so the truncated Kraus set is complete.
  for (double eta : {0.1, 0.5, 0.93}) {
    for (int n = 0; n < 20; ++n) {
      ComplexVector ket = ComplexVector::Zero(20);
      ket(n) = 1.0;
      const FockDensityMatrix out = apply_phase_loss_fock(FockDensityMatrix::pure(ket), 0.4, eta);
      ASSERT_NEAR(out.trace(), 1.0, 1e-12) << "n = " << n;
      // Binomial thinning: <n> scales by eta.
      ASSERT_NEAR(fock_moments(out).nbar, eta * n, 1e-11);
    }
  }
}

TEST(PhaseLossFock, CompositionMatchesProduct) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const FockDensityMatrix rho = random_density(rng, 12, 4);
    const double e1 = u(rng), e2 = u(rng), p1 = 6 * u(rng), p2 = 6 * u(rng);
    const FockDensityMatrix twice = apply_phase_loss_fock(apply_phase_loss_fock(rho, p1, e1), p2, e2);
    ASSERT_LT(trace_distance(twice, apply_phase_loss_fock(rho, p1 + p2, e1 * e2)), 1e-10);
  }
}

TEST(SldQfi, Examples) {
  const FockDensityMatrix coh = prepare_probe_fock(ProbeSpec::coherent(1.0), 30);
  EXPECT_LE(rel_diff(sld_qfi(phase_encoded(coh), 0.0), 4.0), 1e-5);
  const FockDensityMatrix sv = prepare_probe_fock(ProbeSpec::squeezed_vacuum(0.5), 50);
  EXPECT_NEAR(2 * std::pow(std::sinh(1.0), 2), 2.7621957, 1e-7);
  EXPECT_LE(rel_diff(sld_qfi(phase_encoded(sv), 0.0), 2 * std::pow(std::sinh(1.0), 2)), 1e-4);
  const FockFamily constant = [coh](double) { return coh; };
  EXPECT_LE(std::abs(sld_qfi(constant, 0.0)), 1e-10);
}

TEST(SldQfi, InvariantUnderFixedUnitaries) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    const ProbeSpec probe = testing::random_probe(rng, 1.5);
    FPChannelPoint p;
    p.eta = 0.3 + 0.6 * std::uniform_real_distribution<double>(0, 1)(rng);
    p.dphi_dtheta = 0.8;
    p.deta_dtheta = 0.05;
    const FockFamily f = fock_channel_family(probe, p, 40);
    const FockFamily g = [f](double th) { return apply_phase_loss_fock(f(th), 1.7, 1.0); };
    const double a = sld_qfi(f, 0.0), b = sld_qfi(g, 0.0);
    ASSERT_GE(a, 0.0);
    ASSERT_LE(std::abs(a - b), 1e-8 * std::max(1.0, a));
  }
}

TEST(TruncationError, Examples) {
  EXPECT_LE(truncation_error(FockDensityMatrix::vacuum(10)), 1e-15);
  EXPECT_LE(truncation_error(prepare_probe_fock(ProbeSpec::coherent(1.0), 30)), 1e-10);
  EXPECT_GT(truncation_error(FockDensityMatrix::pure(coherent_ket(5.0, 10))), 0.01);
}

TEST(FockGaussianAgreement, MomentsMatchForRandomProbes) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const ProbeSpec probe = testing::random_probe(rng, 2.0);
    const double phi = 6 * u(rng), eta = u(rng);
    const GaussianState g = phase_loss_channel(prepare_probe(probe), 0, phi, eta);
    const int cutoff = testing::leakage_checked_cutoff(probe);
    const FockMoments f = fock_moments(apply_phase_loss_fock(prepare_probe_fock(probe, cutoff), phi, eta));
    ASSERT_NEAR(f.nbar, mean_photon(g, 0), 1e-7);
    ASSERT_NEAR(f.mean_x, g.mean()(0), 1e-7);
    ASSERT_NEAR(f.mean_p, g.mean()(1), 1e-7);
    ASSERT_NEAR(f.var_x, g.covariance()(0, 0), 1e-7);
    ASSERT_NEAR(f.var_p, g.covariance()(1, 1), 1e-7);
  }
}

TEST(FockGaussianAgreement, ChannelQfiForSqueezedCoherentProbes) {
  // The acceptance grid covers coherent and squeezed-vacuum probes; this adds
  // displaced squeezed states with a transmissivity gradient.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 6; ++k) {
    FPChannelPoint p;
    p.phi = 6 * u(rng);
    p.eta = 0.2 + 0.7 * u(rng);
    p.dphi_dtheta = 0.3 + u(rng);
    p.deta_dtheta = 0.1 * u(rng);
    const ProbeSpec probe = ProbeSpec::squeezed_coherent(1.0 + u(rng), 0.4 * u(rng), 3 * u(rng), 6 * u(rng));
    const double gaussian = gaussian_qfi(build_channel_output(probe, p), 0.0).qfi;
    const double fock = sld_qfi(fock_channel_family(probe, p, 50), 0.0);
    ASSERT_LE(rel_diff(gaussian, fock), 1e-4);
  }
}

TEST(FockProperties, RandomChannelsKeepStatesPhysical) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const ProbeSpec probe = testing::random_probe(rng, 2.0);
    const FockDensityMatrix in = prepare_probe_fock(probe, testing::leakage_checked_cutoff(probe, 1e-8));
    ASSERT_LE(truncation_error(in), 1e-8);
    const FockDensityMatrix out = apply_phase_loss_fock(in, 6 * u(rng), u(rng));
    ASSERT_NEAR(out.trace(), in.trace(), 1e-8);
    ASSERT_GE(out.min_eigenvalue(), -1e-10);
    ASSERT_LE((out.rho() - out.rho().adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

}  // namespace
}  // namespace slitqfi
