// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "app/commands.hpp"
#include "app/run_config.hpp"
#include "slitqfi/error.hpp"
#include "slitqfi/fock_oracle.hpp"
#include "slitqfi/metrology.hpp"
#include "slitqfi/slit_model.hpp"
#include "slitqfi/sweep.hpp"
#include "testing.hpp"

namespace {

using namespace slitqfi;
using testing::rel_diff;

struct Outcome {
  bool pass = false;
  std::string detail;
};

FPChannelPoint make_point(double eta, double dphi, double deta = 0.0, double phi = 0.0) {
  FPChannelPoint p;
  p.phi = phi;
  p.eta = eta;
  p.dphi_dtheta = dphi;
  p.deta_dtheta = deta;
  return p;
}

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const app::OracleSummary s = app::run_oracle_check(app::OracleCheckConfig{});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {s.cases.size() == 30 && s.max_rel_error <= 1e-4 && seconds <= 120.0,
          fmt::format("{} cases, max rel err {:.2e} (tol 1e-4), {:.1f} s (limit 120 s)",
                      s.cases.size(), s.max_rel_error, seconds)};
}

Outcome coherent_closed_form() {
  double worst = 0.0;
  for (double nbar : {0.1, 0.5, 1.0, 4.0, 37.0})
    for (double eta : {0.05, 0.3, 0.6, 1.0})
      for (double dphi : {-3.0, 0.01, 0.5, 1.0, 12.0}) {
        const double direct = 4.0 * nbar * eta * dphi * dphi;
        worst = std::max(worst, rel_diff(coherent_qfi(nbar, make_point(eta, dphi)).qfi, direct));
      }
  const double g1 = coherent_qfi(1.0, make_point(1.0, 1.0)).qfi / 4.0;
  return {worst <= 1e-12 && g1 == 1.0,
          fmt::format("max rel diff {:.2e} (tol 1e-12), g_coh(1) = {}", worst, g1)};
}

Outcome homodyne_saturation() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const FPChannelPoint p = make_point(0.05 + 0.95 * u(rng), 4 * u(rng) - 2, 0.0, 6 * u(rng));
    const StateFamily f = build_channel_output(ProbeSpec::coherent(0.1 + 5 * u(rng), 6 * u(rng)), p);
    worst = std::max(worst, rel_diff(optimal_homodyne_fi(f, 0.0, 0).fi, gaussian_qfi(f, 0.0).qfi));
  }
  return {worst <= 1e-9, fmt::format("20 working points, max rel diff {:.2e} (tol 1e-9)", worst)};
}

Outcome crb_ordering(const SweepResult& demo) {
  double worst = -std::numeric_limits<double>::infinity();
  int checked = 0;
  for (const auto& rec : demo.records) {
    if (rec.fi_homodyne_opt && rec.qfi[demo.homodyne_probe]) {
      worst = std::max(worst, *rec.fi_homodyne_opt - *rec.qfi[demo.homodyne_probe]);
      ++checked;
    }
    if (demo.balanced_probe >= 0 && rec.fi_balanced && rec.qfi[demo.balanced_probe]) {
      worst = std::max(worst, *rec.fi_balanced - *rec.qfi[demo.balanced_probe]);
      ++checked;
    }
  }
  return {checked > 0 && worst <= 1e-9,
          fmt::format("{} comparisons over {} records, max (FI - QFI) = {:.2e} (tol 1e-9)", checked,
                      demo.records.size(), worst)};
}

Outcome loss_monotonicity_and_composition() {
  bool monotone = true;
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<ProbeSpec> probes = {ProbeSpec::coherent(3.0), ProbeSpec::squeezed_vacuum(0.8, 0.3),
                                         ProbeSpec::squeezed_coherent(3.0, 0.5, M_PI / 2)};
  for (const ProbeSpec& probe : probes) {
    const StateFamily f = build_mzi_output(probe, make_point(0.8, 1.0, 0.1, 0.4), 0.2);
    double previous = std::numeric_limits<double>::infinity();
    for (int i = 10; i >= 1; --i) {
      const double extra = i / 10.0;
      const StateFamily lossy = map_family(f, [extra](const GaussianState& s) {
        return phase_loss_channel(s, 0, 0.0, extra);
      });
      const double q = gaussian_qfi(lossy, 0.0).qfi;
      monotone = monotone && q <= previous * (1 + 1e-12);
      previous = q;
    }
  }
  double gauss_err = 0.0, fock_err = 0.0;
  for (int k = 0; k < 50; ++k) {
    const ProbeSpec probe = testing::random_probe(rng, 2.0);
    const double e1 = u(rng), e2 = u(rng), p1 = 6 * u(rng), p2 = 6 * u(rng);
    const GaussianState g = prepare_probe(probe);
    const GaussianState twice = phase_loss_channel(phase_loss_channel(g, 0, p2, e2), 0, p1, e1);
    const GaussianState once = phase_loss_channel(g, 0, p1 + p2, e1 * e2);
    gauss_err = std::max({gauss_err, testing::max_abs(twice.mean() - once.mean()),
                          testing::max_abs(twice.covariance() - once.covariance())});
    const FockDensityMatrix rho = prepare_probe_fock(probe, testing::leakage_checked_cutoff(probe, 1e-8));
    fock_err = std::max(fock_err, trace_distance(apply_phase_loss_fock(apply_phase_loss_fock(rho, p2, e2), p1, e1),
                                                 apply_phase_loss_fock(rho, p1 + p2, e1 * e2)));
  }
  return {monotone && gauss_err <= 1e-12 && fock_err <= 1e-12,
          fmt::format("monotone on 10-point eta grid: {}; composition error gaussian {:.1e}, fock {:.1e} (tol 1e-12)",
                      monotone ? "yes" : "no", gauss_err, fock_err)};
}

Outcome factorization_and_argmax(const SweepConfig& demo_cfg) {
  SweepConfig cfg = demo_cfg;
  cfg.eta = {EtaSetting::Mode::kFixed, 1.0};
  const SweepResult r = run_sweep(cfg);
  double spread = 0.0;
  for (std::size_t p = 0; p < r.probe_labels.size(); ++p) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& rec : r.records) {
      const double ratio = *rec.qfi[p] / rec.gen_sq;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    spread = std::max(spread, (hi - lo) / hi);
  }
  const ArgmaxResult gen = refine_argmax(r, "gen_sq");
  double worst = 0.0;
  for (const auto& label : r.probe_labels)
    worst = std::max(worst, std::abs(refine_argmax(r, "qfi_" + label).theta_star - gen.theta_star));
  return {spread <= 1e-9 && worst <= 1e-9,
          fmt::format("qfi/gen_sq spread {:.1e} (tol 1e-9); argmax theta* = {:.9f}, max deviation {:.1e} (tol 1e-9)",
                      spread, gen.theta_star, worst)};
}

Outcome separation(const SweepConfig& demo_cfg, const SweepResult& demo) {
  std::ostringstream first, second;
  write_sweep_csv(first, demo);
  write_sweep_csv(second, run_sweep(demo_cfg, 2));
  std::istringstream in(first.str());
  const OptimaReport reread = compare_optima(read_sweep_csv(in));
  const OptimaReport rep = compare_optima(demo);
  bool all = true;
  std::string detail = fmt::format("theta*_Q = {:.3f}, grid step {:.3f};", rep.argmax_q.theta_star, rep.grid_step);
  for (std::size_t i = 0; i < rep.probes.size(); ++i) {
    const auto& p = rep.probes[i];
    all = all && p.separated && p.separation > 2 * rep.grid_step && reread.probes[i].separated &&
          reread.probes[i].separation == p.separation;
    detail += fmt::format(" {} |dtheta*| = {:.3f};", p.label, p.separation);
  }
  const bool same = first.str() == second.str();
  detail += fmt::format(" CSV reproducible: {}", same ? "yes" : "no");
  return {all && same, detail};
}

Outcome squeezing_enhancement(const app::RunConfig& demo) {
  FPChannelPoint p = channel_point(demo.sweep.slit, demo.point_theta, demo.sweep.fd_step);
  p.eta = 1.0;
  p.deta_dtheta = 0.0;
  const ProbeSpec* sq = nullptr;
  for (const auto& probe : demo.sweep.probes)
    if (probe.spec.kind == ProbeKind::kSqueezedCoherent) sq = &probe.spec;
  if (!sq) return {false, "demo config has no squeezed-coherent probe"};
  const double coh = gaussian_qfi(build_mzi_output(ProbeSpec::coherent(sq->nbar), p, demo.sweep.phi_ref), p.theta).qfi;
  const double squ = gaussian_qfi(build_mzi_output(*sq, p, demo.sweep.phi_ref), p.theta).qfi;
  return {squ > coh, fmt::format("theta = {}, nbar = {}: squeezed-assisted {:.6g} vs coherent {:.6g} (ratio {:.4f})",
                                 p.theta, sq->nbar, squ, coh, squ / coh)};
}

Outcome q_extraction() {
  double worst = 0.0;
  for (double R : {0.8, 0.9, 0.95}) {
    SlitConfig cfg;
    cfg.dispersion = ToyDispersion{.a_len = 0.0, .b_end = 0.0, .phi0 = 0.0};
    cfg.mirror_r0 = std::sqrt(R);
    cfg.tau = 0.9 * std::sqrt(1.0 - R);
    const ResonanceReport q = quality_factor(cfg, 120.0, {450.0, 900.0});
    const double analytic = M_PI * std::sqrt(R) / (1 - R) * 2 * cfg.n_out * cfg.t / q.lambda_res;
    worst = std::max(worst, rel_diff(q.q_factor, analytic));
  }
  return {worst <= 0.02, fmt::format("R in {{0.8, 0.9, 0.95}}: max rel diff {:.2e} (tol 2e-2)", worst)};
}

Outcome fuzz_invariants() {
  std::mt19937_64 rng(20241016);
  double min_eig = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k)
    min_eig = std::min(min_eig, min_uncertainty_eigenvalue(testing::random_circuit(rng)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double trace_err = 0.0, leakage = 0.0;
  for (int k = 0; k < 200; ++k) {
    const ProbeSpec probe = testing::random_probe(rng, 2.0);
    const FockDensityMatrix in = prepare_probe_fock(probe, testing::leakage_checked_cutoff(probe, 1e-8));
    const FockDensityMatrix out = apply_phase_loss_fock(in, 6 * u(rng), u(rng));
    trace_err = std::max(trace_err, std::abs(out.trace() - in.trace()));
    leakage = std::max(leakage, truncation_error(in));
  }
  return {min_eig >= -1e-9 && trace_err <= 1e-8 && leakage <= 1e-8,
          fmt::format("1000 circuits min eig(sigma + i Omega) = {:.2e} (>= -1e-9); 200 Fock channels max "
                      "trace change {:.1e} (tol 1e-8) at input leakage <= {:.1e}",
                      min_eig, trace_err, leakage)};
}

}  // namespace

int main() {
  const app::RunConfig demo = app::demo_config();
  SweepResult demo_sweep;
  try {
    demo_sweep = run_sweep(demo.sweep, 1);
  } catch (const std::exception& e) {
    fmt::print("demo sweep failed: {}\n", e.what());
    return 1;
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gaussian-vs-fock oracle equivalence", oracle_equivalence},
      {"coherent closed form", coherent_closed_form},
      {"homodyne saturation", homodyne_saturation},
      {"classical FI below QFI", [&] { return crb_ordering(demo_sweep); }},
      {"loss monotonicity and composition", loss_monotonicity_and_composition},
      {"factorization and argmax invariance", [&] { return factorization_and_argmax(demo.sweep); }},
      {"Q vs QFI argmax separation", [&] { return separation(demo.sweep, demo_sweep); }},
      {"squeezing enhancement", [&] { return squeezing_enhancement(demo); }},
      {"Q extraction", q_extraction},
      {"fuzz invariants", fuzz_invariants},
  };

  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failures += o.pass ? 0 : 1;
    fmt::print("{} [{:2}] {}: {}\n", o.pass ? "PASS" : "FAIL", ++index, name, o.detail);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
