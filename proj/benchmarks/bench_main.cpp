#include <benchmark/benchmark.h>

#include <driftscan/fbm.hpp>
#include <driftscan/multiscale.hpp>
#include <driftscan/quantiles.hpp>
#include <driftscan/rng.hpp>
#include <driftscan/sde.hpp>

namespace driftscan {
namespace {

void BM_TestStatistic(benchmark::State& state) {
  const double T = static_cast<double>(state.range(0));
  const auto path = simulate_em(DriftSpec::linear(-1.0), 0.0, T, 0.005, 1);
  TestConfig config;
  config.eta = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(test_statistic(path, config).statistic);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * path.size()));
}
BENCHMARK(BM_TestStatistic)->Arg(100)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_SimulateEm(benchmark::State& state) {
  const auto drift = DriftSpec::b_alt();
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_em(drift, 0.0, 500.0, 0.005, ++seed).values.back());
}
BENCHMARK(BM_SimulateEm)->Unit(benchmark::kMillisecond);

void BM_LimitSamplerDraw(benchmark::State& state) {
  QuantileConfig config;
  config.eta = 0.1;
  config.n1 = static_cast<int>(state.range(0));
  config.n2 = static_cast<int>(state.range(0));
  const LimitSampler sampler(config, {InvariantDensity(config.b0.with_offset(config.eta)),
                                      InvariantDensity(config.b0.with_offset(-config.eta))});
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.draw(derive_seed(7, ++seed)));
}
BENCHMARK(BM_LimitSamplerDraw)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_HurstKernelTable(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const HurstKernelTable table(0.4, steps, 1.0 / static_cast<double>(steps));
    benchmark::DoNotOptimize(table.weight(steps, 0));
  }
}
BENCHMARK(BM_HurstKernelTable)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Hyp2f1Euler(benchmark::State& state) {
  double z = -0.6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hyp2f1(-0.1, 0.1, 0.9, z));
    z = z < -50.0 ? -0.6 : z * 1.01;
  }
}
BENCHMARK(BM_Hyp2f1Euler);

}  // namespace
}  // namespace driftscan

BENCHMARK_MAIN();
