#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "curate/digest.hpp"
#include "curate/errors.hpp"
#include "curate/image.hpp"
#include "curate/pipeline.hpp"
#include "synth.hpp"

using namespace curate;
namespace fs = std::filesystem;

namespace {

PipelineConfig make_config(const fs::path& dir, std::size_t n, const std::string& out = "out", Json extra = {}) {
  if (!fs::exists(dir / "aria.jsonl")) {
    auto recs = fixture::synth_records(n, 77);
    std::vector<GroundingRecord> aria, showui;
    for (auto& r : recs) (r.source == Source::ShowUIDesktop ? showui : aria).push_back(r);
    write_records(dir / "aria.jsonl", aria);
    write_records(dir / "showui.jsonl", showui);
  }
  Json j = {{"seed", 2024},
            {"mock", true},
            {"output_dir", out},
            {"datasets",
             {{{"source", "AriaUI-Web"}, {"path", "aria.jsonl"}},
              {{"source", "ShowUI-Desktop"}, {"path", "showui.jsonl"}}}},
            {"diversity", {{"ratio", 0.3}, {"target_dim", 8}}}};
  if (extra.is_object()) j.merge_patch(extra);
  return PipelineConfig::from_json(j, dir);
}

std::vector<GroundingRecord> all_inputs(const fs::path& dir) {
  auto a = read_records(dir / "aria.jsonl");
  auto b = read_records(dir / "showui.jsonl");
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string file_text(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Delegates to a mock but fails chosen records or stages.
class RiggedClient : public ModelClient {
 public:
  RiggedClient(ClientConfig c, MockBehavior b, std::set<std::string> fail_ids, bool explode_embed)
      : ModelClient(c), inner_(c, b), fail_ids_(std::move(fail_ids)), explode_embed_(explode_embed) {}

  GroundResult ground(const GroundingRecord& r) override {
    count_request();
    return inner_.ground(r);
  }
  EmbeddingVector embed(const GroundingRecord& r) override {
    count_request();
    if (explode_embed_) throw std::runtime_error("backend exploded");
    return inner_.embed(r);
  }
  Label binary_judge(JudgeKind k, const GroundingRecord& r, const BBox& box) override {
    count_request();
    if (fail_ids_.count(r.id)) throw RequestError("gave up", r.id, 3);
    return inner_.binary_judge(k, r, box);
  }
  std::string complete(const std::string& p, const std::optional<ImagePayload>& img) override {
    count_request();
    return inner_.complete(p, img);
  }

 private:
  MockClient inner_;
  std::set<std::string> fail_ids_;
  bool explode_embed_;
};

}  // namespace

TEST(Pipeline, MockRunIsReproducibleAcrossOutputDirs) {
  const auto dir = fixture::scratch_dir("pipeline-repro");
  const auto a = run_pipeline(make_config(dir, 300, "out-a"));
  const auto b = run_pipeline(make_config(dir, 300, "out-b"));
  ASSERT_TRUE(a.manifest.complete);
  ASSERT_EQ(a.manifest.stages.size(), b.manifest.stages.size());
  for (std::size_t i = 0; i < a.manifest.stages.size(); ++i) {
    EXPECT_EQ(a.manifest.stages[i].name, b.manifest.stages[i].name);
    EXPECT_EQ(a.manifest.stages[i].config_digest, b.manifest.stages[i].config_digest);
    EXPECT_EQ(a.manifest.stages[i].content_digest, b.manifest.stages[i].content_digest);
  }
  EXPECT_EQ(a.survivors, b.survivors);
  EXPECT_EQ(file_text(dir / "out-a" / "survivors.jsonl"), file_text(dir / "out-b" / "survivors.jsonl"));
  EXPECT_EQ(file_text(dir / "out-a" / "ranker_triplets.jsonl"), file_text(dir / "out-b" / "ranker_triplets.jsonl"));

  std::vector<std::string> names;
  for (const auto& s : a.manifest.stages) names.push_back(s.name);
  EXPECT_EQ(names, (std::vector<std::string>{"input", "difficulty", "alignment", "diversity", "ambiguity", "review"}));
  EXPECT_EQ(a.manifest.pending_review, a.survivors.size());
  EXPECT_GT(a.manifest.ranker_triplets, 0u);
}

TEST(Pipeline, SurvivorsAreAnUnmodifiedSubsetAndCountsChain) {
  const auto dir = fixture::scratch_dir("pipeline-subset");
  const auto run = run_pipeline(make_config(dir, 300));
  std::map<std::string, GroundingRecord> inputs;
  for (const auto& r : all_inputs(dir)) inputs.emplace(r.id, r);
  ASSERT_FALSE(run.survivors.empty());
  for (const auto& r : run.survivors) {
    auto it = inputs.find(r.id);
    ASSERT_NE(it, inputs.end());
    EXPECT_EQ(it->second, r);
  }
  const auto& st = run.manifest.stages;
  EXPECT_EQ(st.front().output_count, inputs.size());
  for (std::size_t i = 1; i < st.size(); ++i) {
    EXPECT_EQ(st[i].input_count, st[i - 1].output_count);
    EXPECT_LE(st[i].output_count, st[i].input_count);
  }
  // Manifest on disk matches the returned one.
  std::ifstream in(dir / "out" / "manifest.json");
  const auto disk = PipelineManifest::from_json(Json::parse(in));
  EXPECT_EQ(disk.stages.size(), st.size());
  EXPECT_EQ(disk.stages.back().content_digest, records_digest(run.survivors));
  EXPECT_TRUE(fs::exists(dir / "out" / "clustering_report.json"));
}

TEST(Pipeline, DiversityOnlyClustersFlaggedDatasets) {
  const auto dir = fixture::scratch_dir("pipeline-cluster");
  const auto run = run_pipeline(make_config(dir, 300));
  const auto* div = run.manifest.find("diversity");
  ASSERT_NE(div, nullptr);
  // ShowUI rows pass straight through diversity.
  const auto before = read_records(dir / "out" / "stages" / "02_alignment.jsonl");
  const auto after = read_records(dir / "out" / "stages" / "03_diversity.jsonl");
  std::size_t showui_before = 0, showui_after = 0, aria_before = 0, aria_after = 0;
  for (const auto& r : before) (r.source == Source::ShowUIDesktop ? showui_before : aria_before)++;
  for (const auto& r : after) (r.source == Source::ShowUIDesktop ? showui_after : aria_after)++;
  EXPECT_EQ(showui_before, showui_after);
  ASSERT_GT(aria_before, 0u);
  EXPECT_EQ(aria_after, static_cast<std::size_t>(std::ceil(0.3 * aria_before - 1e-9)));
}

TEST(Pipeline, WarmRerunReusesEverything) {
  const auto dir = fixture::scratch_dir("pipeline-warm");
  const auto first = run_pipeline(make_config(dir, 200));
  EXPECT_GT(first.manifest.total_requests(), 0u);
  const auto second = run_pipeline(make_config(dir, 200));
  EXPECT_EQ(second.manifest.total_requests(), 0u);
  for (const auto& s : second.manifest.stages) EXPECT_TRUE(s.reused) << s.name;
  EXPECT_EQ(second.survivors, first.survivors);
  EXPECT_EQ(second.manifest.ranker_triplets, first.manifest.ranker_triplets);
}

TEST(Pipeline, PredictionCacheSurvivesLostStageFiles) {
  const auto dir = fixture::scratch_dir("pipeline-cache");
  const auto first = run_pipeline(make_config(dir, 150));
  fs::remove(dir / "out" / "stages" / "01_difficulty.jsonl");
  const auto second = run_pipeline(make_config(dir, 150));
  const auto* diff = second.manifest.find("difficulty");
  ASSERT_NE(diff, nullptr);
  EXPECT_FALSE(diff->reused);
  EXPECT_EQ(diff->model_requests, 0u);  // served by out/cache/predictions.jsonl
  EXPECT_EQ(diff->content_digest, first.manifest.find("difficulty")->content_digest);
  // Downstream output is identical, so later stages are reused.
  EXPECT_TRUE(second.manifest.find("alignment")->reused);
}

TEST(Pipeline, ConfigChangeInvalidatesOnlyDownstream) {
  const auto dir = fixture::scratch_dir("pipeline-invalidate");
  run_pipeline(make_config(dir, 200));
  const auto changed = run_pipeline(make_config(dir, 200, "out", {{"diversity", {{"ratio", 0.5}}}}));
  EXPECT_TRUE(changed.manifest.find("input")->reused);
  EXPECT_TRUE(changed.manifest.find("difficulty")->reused);
  EXPECT_TRUE(changed.manifest.find("alignment")->reused);
  EXPECT_FALSE(changed.manifest.find("diversity")->reused);
  EXPECT_FALSE(changed.manifest.find("ambiguity")->reused);

  const auto reseeded = run_pipeline(make_config(dir, 200, "out", {{"seed", 7}}));
  EXPECT_FALSE(reseeded.manifest.find("input")->reused);
}

TEST(Pipeline, StageOrderIsConfigurable) {
  const auto dir = fixture::scratch_dir("pipeline-order");
  const auto run = run_pipeline(
      make_config(dir, 120, "out", {{"stage_order", {"alignment", "ambiguity", "difficulty", "diversity"}}}));
  EXPECT_EQ(run.manifest.stages[1].name, "alignment");
  EXPECT_EQ(run.manifest.stages[3].name, "difficulty");
  EXPECT_TRUE(fs::exists(dir / "out" / "stages" / "03_difficulty.jsonl"));
}

TEST(Pipeline, FailedRequestsAreDeferredNotDropped) {
  const auto dir = fixture::scratch_dir("pipeline-defer");
  const auto cfg = make_config(dir, 200);
  const auto inputs = all_inputs(dir);
  std::set<std::string> fail;
  for (std::size_t i = 0; i < inputs.size(); i += 9) fail.insert(inputs[i].id);
  const auto run = run_pipeline(cfg, [&](const std::string&, const ClientConfig& cc) {
    return std::make_unique<RiggedClient>(cc, cfg.mock_behavior, fail, false);
  });
  ASSERT_TRUE(run.manifest.complete);
  const auto* align = run.manifest.find("alignment");
  const auto deferred_path = dir / "out" / "stages" / "02_alignment.deferred.jsonl";
  std::size_t rows = 0;
  for_each_jsonl(deferred_path, [&](const Json& j) {
    ++rows;
    EXPECT_TRUE(fail.count(j.at("id").get<std::string>()));
    EXPECT_EQ(j.at("attempts").get<int>(), 3);
  });
  EXPECT_GT(rows, 0u);
  EXPECT_EQ(align->deferred, rows);
  EXPECT_EQ(align->output_count + align->deferred <= align->input_count, true);
  for (const auto& r : run.survivors) EXPECT_FALSE(fail.count(r.id));
}

TEST(Pipeline, UnexpectedErrorLeavesPartialManifest) {
  const auto dir = fixture::scratch_dir("pipeline-abort");
  const auto cfg = make_config(dir, 120);
  EXPECT_THROW(run_pipeline(cfg,
                            [&](const std::string&, const ClientConfig& cc) {
                              return std::make_unique<RiggedClient>(cc, cfg.mock_behavior, std::set<std::string>{},
                                                                    true);
                            }),
               std::runtime_error);
  std::ifstream in(dir / "out" / "manifest.json");
  const auto m = PipelineManifest::from_json(Json::parse(in));
  EXPECT_FALSE(m.complete);
  ASSERT_EQ(m.stages.size(), 3u);
  EXPECT_EQ(m.stages.back().name, "alignment");
  EXPECT_FALSE(fs::exists(dir / "out" / "survivors.jsonl"));
}

TEST(Pipeline, TracesStageWritesRationales) {
  const auto dir = fixture::scratch_dir("pipeline-traces");
  auto cfg = make_config(dir, 24, "out",
                         {{"traces", {{"enabled", true}}}, {"image_root", "."}, {"diversity", {{"ratio", 1.0}}}});
  std::set<std::string> written;
  for (const auto& r : all_inputs(dir)) {
    if (written.insert(r.image).second) save_png(RgbImage(r.dims.width, r.dims.height, {200, 200, 200}), dir / r.image);
  }
  const auto run = run_pipeline(cfg);
  const auto* tr = run.manifest.find("traces");
  ASSERT_NE(tr, nullptr);
  EXPECT_EQ(tr->deferred, 0u);
  std::size_t rows = 0;
  for_each_jsonl(dir / "out" / "traces.jsonl", [&](const Json& j) {
    ++rows;
    EXPECT_FALSE(j.at("trace").get<std::string>().empty());
  });
  EXPECT_EQ(rows, tr->input_count);
  EXPECT_EQ(tr->model_requests, tr->input_count);
}

TEST(Pipeline, MissingScreenshotDefersTraceButKeepsRecord) {
  const auto dir = fixture::scratch_dir("pipeline-traces-missing");
  auto cfg = make_config(dir, 12, "out", {{"traces", {{"enabled", true}}}, {"image_root", "nowhere"}});
  const auto run = run_pipeline(cfg);
  const auto* tr = run.manifest.find("traces");
  ASSERT_NE(tr, nullptr);
  EXPECT_EQ(tr->deferred, tr->input_count);
  EXPECT_EQ(tr->output_count, tr->input_count);
}

TEST(Pipeline, Downsampling) {
  const auto dir = fixture::scratch_dir("pipeline-downsample");
  make_config(dir, 200);
  const auto run = run_pipeline(PipelineConfig::from_json(
      {{"seed", 1},
       {"mock", true},
       {"output_dir", "out"},
       {"datasets", {{{"source", "AriaUI-Web"}, {"path", "aria.jsonl"}, {"downsample", 0.5}}}}},
      dir));
  const auto aria = read_records(dir / "aria.jsonl");
  EXPECT_EQ(run.manifest.stages.front().output_count, static_cast<std::size_t>(std::llround(0.5 * aria.size())));
}
