#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "msalab/greens.hpp"
#include "msalab/localization.hpp"
#include "msalab/random_operator.hpp"

using namespace msalab;

namespace {

const HoppingKernel kKernel = HoppingKernel::log_power(1.0, 2.0);

void BM_Assemble(benchmark::State& state) {
  const LatticeBox box(Site{0}, state.range(0));
  const auto v = sample_potential(box, DisorderSpec::uniform(1.0), 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(box, v, 0.05, kKernel));
  state.SetComplexityN(static_cast<std::int64_t>(box.size()));
}
BENCHMARK(BM_Assemble)->Arg(64)->Arg(256)->Arg(512)->Complexity();

void BM_Spectrum(benchmark::State& state) {
  const auto s = draw_sample(LatticeBox(Site{0}, state.range(0)), DisorderSpec::uniform(1.0), 0.05, kKernel, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(spectrum(s));
}
BENCHMARK(BM_Spectrum)->Arg(32)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ClassifyCube(benchmark::State& state) {
  const auto s = draw_sample(LatticeBox(Site{0}, state.range(0)), DisorderSpec::uniform(1.0), 0.01, kKernel, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(classify_cube(s, 0.0, 0.15, WeightParams{}));
}
BENCHMARK(BM_ClassifyCube)->Arg(8)->Arg(14)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_DecayFit(benchmark::State& state) {
  const LatticeBox box(Site{0}, state.range(0));
  std::vector<double> a(box.size());
  for_each_site(box, [&](const Site& x) { a[box.index_of(x)] = std::exp(-log_weight(x, 2.0)); });
  for (auto _ : state) benchmark::DoNotOptimize(decay_fit(box, a));
}
BENCHMARK(BM_DecayFit)->Arg(256)->Arg(512)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
