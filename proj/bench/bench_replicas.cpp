// Serial reference loop against the OpenMP replica runner on the same seeds.
//
//   idla_bench --benchmark_filter=clock

#include <benchmark/benchmark.h>

#include "idla/analysis.hpp"
#include "idla/parallel.hpp"

namespace {

using idla::Variant;

std::size_t grow_size(Variant v, std::uint32_t n, std::uint32_t M, std::uint64_t seed) {
  return idla::grow_replica(v, n, M, seed).size();
}

void BM_clock_serial(benchmark::State& state) {
  const auto seeds = idla::seed_range(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto sizes = idla::run_replicas_serial(std::span<const std::uint64_t>(seeds), [](std::uint64_t s) {
      return grow_size(Variant::poisson_clock, 8, 60, s);
    });
    benchmark::DoNotOptimize(sizes.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_clock_parallel(benchmark::State& state) {
  const auto seeds = idla::seed_range(1, static_cast<std::size_t>(state.range(0)));
  const int jobs = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto sizes = idla::run_replicas_parallel(
        std::span<const std::uint64_t>(seeds),
        [](std::uint64_t s) { return grow_size(Variant::poisson_clock, 8, 60, s); }, jobs);
    benchmark::DoNotOptimize(sizes.data());
  }
  state.counters["jobs"] = idla::resolve_jobs(jobs);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_width_serial(benchmark::State& state) {
  idla::AnalysisOptions o;
  o.exec.serial = true;
  const auto seeds = idla::seed_range(1, 32);
  for (auto _ : state) {
    auto r = idla::width_per_level(Variant::deterministic, 30, 50, {0}, seeds, o);
    benchmark::DoNotOptimize(r.records.data());
  }
}

void BM_width_parallel(benchmark::State& state) {
  idla::AnalysisOptions o;
  o.exec.jobs = static_cast<int>(state.range(0));
  const auto seeds = idla::seed_range(1, 32);
  for (auto _ : state) {
    auto r = idla::width_per_level(Variant::deterministic, 30, 50, {0}, seeds, o);
    benchmark::DoNotOptimize(r.records.data());
  }
}

}  // namespace

BENCHMARK(BM_clock_serial)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_clock_parallel)->Args({32, 0})->Args({32, 1})->Args({32, 2})->Args({32, 4})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_width_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_width_parallel)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
