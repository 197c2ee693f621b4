#include <benchmark/benchmark.h>

#include "curate/diversity.hpp"
#include "curate/random.hpp"

using namespace curate;

namespace {

Matrix gaussian(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = standard_normal(rng);
  }
  return x;
}

void BM_KMeans(benchmark::State& state) {
  const auto n = state.range(0), d = state.range(1);
  const Matrix x = gaussian(n, d, 1);
  const auto k = static_cast<std::size_t>((n + 9) / 10);
  for (auto _ : state) benchmark::DoNotOptimize(run_kmeans(x, k, 7).inertia);
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_KMeans)->Args({1000, 64})->Args({4000, 128})->Unit(benchmark::kMillisecond);

void BM_Pca(benchmark::State& state) {
  const auto n = state.range(0), d = state.range(1);
  const Matrix x = gaussian(n, d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca_project(x, 64).projected.data());
}
BENCHMARK(BM_Pca)->Args({2000, 256})->Args({200, 2048})->Unit(benchmark::kMillisecond);

}  // namespace
