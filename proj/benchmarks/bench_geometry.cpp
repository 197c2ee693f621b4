#include <benchmark/benchmark.h>

#include <vector>

#include "curate/geometry.hpp"
#include "curate/random.hpp"

using namespace curate;

namespace {

std::vector<BBox> random_boxes(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BBox> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = uniform01(rng) * 1800, y = uniform01(rng) * 1000;
    out.push_back({x, y, x + 1 + uniform01(rng) * 120, y + 1 + uniform01(rng) * 80});
  }
  return out;
}

void BM_CenterHit(benchmark::State& state) {
  const auto pred = random_boxes(4096, 1), gt = random_boxes(4096, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(center_hit(pred[i & 4095], gt[i & 4095]));
    ++i;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CenterHit);

void BM_SmartResize(benchmark::State& state) {
  Rng rng(3);
  std::vector<ImageDims> dims;
  for (int i = 0; i < 1024; ++i) {
    dims.push_back({1 + static_cast<std::int64_t>(uniform_index(rng, 5000)),
                    1 + static_cast<std::int64_t>(uniform_index(rng, 5000))});
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(smart_resize(dims[i++ & 1023]));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SmartResize);

void BM_ParseBbox(benchmark::State& state) {
  const std::string text =
      "<think>The play control sits in the lower toolbar, right of the progress bar.</think>"
      "<answer>[445,1016,508,1053]</answer>";
  for (auto _ : state) benchmark::DoNotOptimize(parse_bbox(text));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ParseBbox);

}  // namespace
