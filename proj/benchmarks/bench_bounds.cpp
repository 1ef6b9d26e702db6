#include <benchmark/benchmark.h>

#include "rwtree/bounds.hpp"
#include "rwtree/branching.hpp"

namespace {

using namespace rwtree;

EnvSpec example_env() { return EnvSpec::rwre(2, {{0.3, 1.0 / 30}, {3.5, 29.0 / 30}}); }

void BM_GeometricMoment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  double q = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(geometric_moment(n, q));
    q = q > 0.95 ? 0.05 : q + 0.01;
  }
}
BENCHMARK(BM_GeometricMoment)->Arg(2)->Arg(8)->Arg(24);

void BM_SpeedBoundRwre(benchmark::State& state) {
  const EnvSpec env = example_env();
  for (auto _ : state) benchmark::DoNotOptimize(speed_bounds(env, 0.2144012));
}
BENCHMARK(BM_SpeedBoundRwre);

void BM_ComputeBoundsExample(benchmark::State& state) {
  const EnvSpec env = example_env();
  BoundsParams params;
  params.psi = 1;
  for (auto _ : state) benchmark::DoNotOptimize(compute_bounds(env, params));
}
BENCHMARK(BM_ComputeBoundsExample)->Unit(benchmark::kMillisecond);

void BM_OffspringMc(benchmark::State& state) {
  OffspringMcOptions opt;
  opt.samples = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(offspring_mc(EnvSpec::orrw(2, 2.0), 4, opt));
}
BENCHMARK(BM_OffspringMc)->Arg(10'000)->Unit(benchmark::kMillisecond);

void BM_GammaRoot(benchmark::State& state) {
  const OffspringDist law = offspring_exact_rwre_psi1(example_env());
  for (auto _ : state) benchmark::DoNotOptimize(gamma_root(law.probs, 3));
}
BENCHMARK(BM_GammaRoot);

}  // namespace
