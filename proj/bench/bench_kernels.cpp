// Throughput comparison of the scoring and generation kernels: a naive
// per-pair reference, the tiled serial sweep, and the OpenMP sweep. The three
// scoring variants return identical counts; the benchmark exists to keep the
// tiled/parallel paths honest about actually being faster.

#include <benchmark/benchmark.h>

#include <cstdint>

#include "eerkit/scoring.hpp"
#include "eerkit/synthgen.hpp"

using namespace eerkit;

namespace {

const FeatureMatrix& bench_matrix(std::size_t n, std::size_t k) {
  static std::map<std::pair<std::size_t, std::size_t>, FeatureMatrix> cache;
  auto it = cache.find({n, k});
  if (it == cache.end()) {
    it = cache.emplace(std::make_pair(n, k), generate(SynthSpec{n, k, 0.7, 99})).first;
  }
  return it->second;
}

ThresholdQuery mid_query() { return {0.5, 0.0, 1.0, 0}; }

void BM_scores_naive_per_pair(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const ScoreModel model(bench_matrix(n, k));
  const auto q = mid_query();
  for (auto _ : state) {
    std::uint64_t above = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        above += (model.score(i, j) > q.threshold);
      }
    }
    benchmark::DoNotOptimize(above);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) *
                          static_cast<std::int64_t>(n));
}

void BM_scores_tiled_serial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const ScoreModel model(bench_matrix(n, k));
  const auto q = mid_query();
  for (auto _ : state) {
    auto c = stream_counts_serial(model, q);
    benchmark::DoNotOptimize(c.impostors_above);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) *
                          static_cast<std::int64_t>(n));
}

void BM_scores_tiled_parallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const ScoreModel model(bench_matrix(n, k));
  const auto q = mid_query();
  for (auto _ : state) {
    auto c = stream_counts(model, q);
    benchmark::DoNotOptimize(c.impostors_above);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) *
                          static_cast<std::int64_t>(n));
}

void BM_generate_serial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto m = generate_serial(SynthSpec{n, k, 0.7, 1234});
    benchmark::DoNotOptimize(m.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) *
                          static_cast<std::int64_t>(k) * 2);
}

void BM_generate_parallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto m = generate(SynthSpec{n, k, 0.7, 1234});
    benchmark::DoNotOptimize(m.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) *
                          static_cast<std::int64_t>(k) * 2);
}

}  // namespace

BENCHMARK(BM_scores_naive_per_pair)->Args({2000, 10})->Args({2000, 50})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scores_tiled_serial)->Args({2000, 10})->Args({2000, 50})->Args({8000, 10})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scores_tiled_parallel)->Args({2000, 10})->Args({2000, 50})->Args({8000, 10})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_generate_serial)->Args({20000, 20})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_generate_parallel)->Args({20000, 20})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
