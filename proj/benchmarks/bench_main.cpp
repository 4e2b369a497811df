#include "semdist/filtering.hpp"
#include "semdist/matan.hpp"
#include "semdist/semantics.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

namespace {

using namespace semdist;

DenseMatrix uniform_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m(rows, cols);
  for (double& x : m.values()) x = u(rng);
  return m;
}

std::vector<Candidate> random_candidates(const char* prefix, std::size_t n, double lo, double hi,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Candidate> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({prefix + std::to_string(i), u(rng)});
  return out;
}

void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = uniform_matrix(n, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(svd(m, 8));
}
BENCHMARK(BM_Svd)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SubspaceReport(benchmark::State& state) {
  const auto w = uniform_matrix(64, 64, 2);
  const auto dw = uniform_matrix(64, 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(subspace_report(w, dw, 8, 0));
}
BENCHMARK(BM_SubspaceReport)->Unit(benchmark::kMillisecond);

void BM_GreedySelect(benchmark::State& state) {
  const auto working = random_candidates("w", static_cast<std::size_t>(state.range(0)), 0.3, 0.9, 4);
  const auto pool = random_candidates("p", static_cast<std::size_t>(state.range(1)), 0.0, 1.2, 5);
  const FilterConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(greedy_select(working, pool, cfg));
}
BENCHMARK(BM_GreedySelect)->Args({100, 1000})->Args({1000, 10000})->Unit(benchmark::kMillisecond);

void BM_MeanPoolCosine(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto a = uniform_matrix(12, dim, 6);
  const auto b = uniform_matrix(8, dim, 7);
  for (auto _ : state) {
    const auto pa = mean_pool(a);
    const auto pb = mean_pool(b);
    benchmark::DoNotOptimize(cosine_distance(pa, pb));
  }
}
BENCHMARK(BM_MeanPoolCosine)->Arg(768)->Arg(4096);

}  // namespace
BENCHMARK_MAIN();
