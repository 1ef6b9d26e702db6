#include <benchmark/benchmark.h>

#include "rwtree/mc.hpp"
#include "rwtree/model.hpp"
#include "rwtree/regen.hpp"

namespace {

using namespace rwtree;

EnvSpec example_env() { return EnvSpec::rwre(2, {{0.3, 1.0 / 30}, {3.5, 29.0 / 30}}); }

void BM_WalkStepRwre(benchmark::State& state) {
  const auto steps = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t replica = 0;
  for (auto _ : state) {
    Walk w(example_env(), SeedSpec{1, replica++, Purpose::walk});
    for (std::uint64_t i = 0; i < steps; ++i) benchmark::DoNotOptimize(w.step());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * steps));
}
BENCHMARK(BM_WalkStepRwre)->Arg(10'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_WalkStepOrrw(benchmark::State& state) {
  const auto steps = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t replica = 0;
  for (auto _ : state) {
    Walk w(EnvSpec::orrw(2, 2.0), SeedSpec{1, replica++, Purpose::walk});
    for (std::uint64_t i = 0; i < steps; ++i) benchmark::DoNotOptimize(w.step());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * steps));
}
BENCHMARK(BM_WalkStepOrrw)->Arg(10'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_WalkWithTracker(benchmark::State& state) {
  const auto steps = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t replica = 0;
  for (auto _ : state) {
    Walk w(example_env(), SeedSpec{1, replica++, Purpose::walk});
    RegenTracker tr;
    for (std::uint64_t i = 0; i < steps; ++i) tr.observe(w.step());
    benchmark::DoNotOptimize(tr.finalize());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * steps));
}
BENCHMARK(BM_WalkWithTracker)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_Replica(benchmark::State& state) {
  CampaignConfig cfg;
  cfg.max_steps = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t replica = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_replica(example_env(), cfg, replica++));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * cfg.max_steps));
}
BENCHMARK(BM_Replica)->Arg(100'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
