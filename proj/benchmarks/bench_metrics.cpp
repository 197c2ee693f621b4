#include <benchmark/benchmark.h>

#include <vector>

#include "curate/metrics.hpp"
#include "curate/random.hpp"

using namespace curate;

namespace {

void BM_GroundingReport(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<GroundingRecord> gold;
  PredictionMap preds;
  for (std::size_t i = 0; i < n; ++i) {
    GroundingRecord r;
    r.id = "r" + std::to_string(i);
    r.image = "img.png";
    r.dims = {1920, 1080};
    r.instruction = "x";
    r.gt_box = {100, 100, 200, 200};
    r.platform = static_cast<Platform>(uniform_index(rng, 3));
    r.elem_type = static_cast<ElemType>(uniform_index(rng, 2));
    gold.push_back(r);
    preds[r.id] = Point{50 + uniform01(rng) * 200, 50 + uniform01(rng) * 200};
  }
  for (auto _ : state) benchmark::DoNotOptimize(grounding_report(preds, gold).macro);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_GroundingReport)->Arg(1272)->Arg(20000);

}  // namespace
