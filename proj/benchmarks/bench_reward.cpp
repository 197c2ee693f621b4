#include <benchmark/benchmark.h>

#include <sstream>
#include <vector>

#include "curate/random.hpp"
#include "curate/reward.hpp"

using namespace curate;

namespace {

std::vector<std::string> rollouts(std::size_t n, std::size_t words) {
  static const char* vocab[] = {"tap", "the", "gear", "icon", "at", "top", "right", "to", "open", "settings"};
  Rng rng(9);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream os;
    os << "<think>";
    for (std::size_t w = 0; w < words; ++w) os << (w ? " " : "") << vocab[uniform_index(rng, 10)];
    os << "</think><answer>[" << uniform_index(rng, 900) << "," << uniform_index(rng, 900) << ","
       << 900 + uniform_index(rng, 900) << "," << 900 + uniform_index(rng, 900) << "]</answer>";
    out.push_back(os.str());
  }
  return out;
}

void BM_RewardBreakdown(benchmark::State& state) {
  const auto texts = rollouts(512, static_cast<std::size_t>(state.range(0)));
  const RewardConfig cfg;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(reward_breakdown(texts[i++ & 511], BBox{400, 400, 1400, 1400}, cfg));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RewardBreakdown)->Arg(20)->Arg(80)->Arg(300);

void BM_MatchesFormatMalformed(benchmark::State& state) {
  const std::string text = "<think>" + std::string(2000, 'x') + "</think><answer>[1,2,3]</answer>";
  for (auto _ : state) benchmark::DoNotOptimize(matches_format(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_MatchesFormatMalformed);

}  // namespace
