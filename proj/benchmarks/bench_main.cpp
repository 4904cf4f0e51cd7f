#include <benchmark/benchmark.h>

#include <cmath>

#include "slitqfi/fock_oracle.hpp"
#include "slitqfi/metrology.hpp"
#include "slitqfi/slit_model.hpp"
#include "slitqfi/sweep.hpp"

namespace {

using namespace slitqfi;

FPChannelPoint working_point() {
  FPChannelPoint p;
  p.phi = 0.4;
  p.eta = 0.6;
  p.dphi_dtheta = 1.0;
  p.deta_dtheta = 0.05;
  return p;
}

void BM_GaussianQfiMzi(benchmark::State& state) {
  const ProbeSpec probe = state.range(0) == 0 ? ProbeSpec::coherent(4.0)
                                              : ProbeSpec::squeezed_coherent(4.0, 0.5, M_PI / 2);
  const StateFamily family = build_mzi_output(probe, working_point(), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_qfi(family, 0.0).qfi);
}
BENCHMARK(BM_GaussianQfiMzi)->Arg(0)->Arg(1);

void BM_SldQfi(benchmark::State& state) {
  const int cutoff = static_cast<int>(state.range(0));
  const FockFamily family = fock_channel_family(ProbeSpec::squeezed_vacuum(0.5), working_point(), cutoff);
  for (auto _ : state) benchmark::DoNotOptimize(sld_qfi(family, 0.0));
}
BENCHMARK(BM_SldQfi)->Arg(30)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_QualityFactor(benchmark::State& state) {
  const SlitConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(quality_factor(cfg, 140.0, {450.0, 900.0}).q_factor);
}
BENCHMARK(BM_QualityFactor)->Unit(benchmark::kMicrosecond);

void BM_RunSweep(benchmark::State& state) {
  SweepConfig cfg;
  cfg.probes = {{"coherent", ProbeSpec::coherent(4.0)},
                {"squeezed_coherent", ProbeSpec::squeezed_coherent(4.0, 0.5, M_PI / 2)}};
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(cfg, workers).records.size());
}
BENCHMARK(BM_RunSweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
