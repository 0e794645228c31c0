// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "blalab/concat_lpm.hpp"
#include "blalab/lpm.hpp"
#include "blalab/parametric_fit.hpp"
#include "blalab/simulator.hpp"

namespace {

using namespace blalab;

MultisineSpec full_grid(int n, std::uint64_t seed = 1) {
  MultisineDesign d;
  d.grid_kind = GridKind::full;
  d.samples_per_period = n;
  d.seed = seed;
  return design_multisine(d);
}

void BM_Dft(benchmark::State& state) {
  const auto x = render_period(full_grid(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(dft(x, 50.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dft)->Arg(5000)->Arg(10000)->Arg(40000)->Complexity();

void BM_Simulate(benchmark::State& state) {
  auto sys = WienerSurrogate::default_surrogate();
  sys.alpha3 = 0.1;
  sys.noise_std = 0.01;
  const auto u = render_multisine(full_grid(5000), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(simulate(sys, u, 1));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(7);

void BM_EstimateFrf(benchmark::State& state) {
  const auto spec = full_grid(5000);
  const auto u = render_multisine(spec, 1);
  auto sys = WienerSurrogate::default_surrogate();
  sys.noise_std = 0.01;
  const auto y = simulate(sys, u, 1);
  const auto U = dft(u);
  const auto Y = dft(y);
  LpmConfig config;
  config.poly_order = 2;
  config.half_window = static_cast<int>(state.range(0));
  config.band = spec.band;
  config.estimate_noise_var = true;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_frf(U, Y, config));
}
BENCHMARK(BM_EstimateFrf)->Arg(3)->Arg(4)->Arg(8);

void BM_EstimateConcat(benchmark::State& state) {
  auto sys = WienerSurrogate::default_surrogate();
  sys.noise_std = 0.01;
  ConcatDataset ds;
  for (int i = 0; i < state.range(0); ++i) {
    sys.initial_state = {1.0 * i, -0.5, 0.25};
    // Fresh phases per sub-record keep every bin of the concatenation excited.
    const auto u = render_multisine(full_grid(5000, 10 + static_cast<std::uint64_t>(i)), 1);
    ds.subrecords.push_back({u.samples, simulate(sys, u, static_cast<std::uint64_t>(i)).samples, {}});
  }
  const auto config =
      ConcatConfig::defaults(band_to_bins(1.0, 5.0, 50.0, ds.total_length()), ds.n_concat());
  for (auto _ : state) benchmark::DoNotOptimize(estimate_frf_concat(ds, config));
}
BENCHMARK(BM_EstimateConcat)->Arg(2)->Arg(3);

void BM_FitThirdOrder(benchmark::State& state) {
  const auto truth = WienerSurrogate::default_surrogate().linear;
  FitData data;
  data.n_lines = 5000;
  for (int k = 100; k <= 500; ++k) {
    data.bins.push_back(k);
    data.theta.push_back(2.0 * 3.141592653589793 * k / 5000);
    data.g.push_back(truth.response(data.theta.back()));
    data.variance.push_back(1.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_tf(data, 3, 3));
}
BENCHMARK(BM_FitThirdOrder);

}  // namespace

BENCHMARK_MAIN();
