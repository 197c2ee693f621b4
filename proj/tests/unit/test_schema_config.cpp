#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "curate/config.hpp"
#include "curate/digest.hpp"
#include "curate/errors.hpp"
#include "curate/benchmark_io.hpp"
#include "curate/image.hpp"
#include "curate/pipeline.hpp"
#include "curate/schema.hpp"
#include "synth.hpp"

using namespace curate;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::trunc) << s;
}

}  // namespace

TEST(RecordJson, FieldOrderAndIntegers) {
  GroundingRecord r;
  r.id = "x1";
  r.image = "a.png";
  r.dims = {1920, 1080};
  r.instruction = "Öffnen";
  r.gt_box = {10, 20, 30.5, 40};
  r.source = Source::AriaUIWeb;
  r.platform = Platform::Web;
  r.elem_type = ElemType::Icon;
  EXPECT_EQ(dump_row(record_to_json(r)),
            R"({"id":"x1","image":"a.png","width":1920,"height":1080,"instruction":"Öffnen","bbox":[10,20,30.5,40],)"
            R"("source":"AriaUI-Web","platform":"web","elem_type":"icon"})");
  EXPECT_EQ(record_from_json(Json::parse(dump_row(record_to_json(r)))), r);
  r.elem_type.reset();
  EXPECT_EQ(dump_row(record_to_json(r)).find("elem_type"), std::string::npos);
}

TEST(RecordJson, RoundTripThroughFile) {
  const auto dir = fixture::scratch_dir("schema-roundtrip");
  const auto recs = fixture::synth_records(250, 51);
  write_records(dir / "r.jsonl", recs);
  EXPECT_EQ(read_records(dir / "r.jsonl"), recs);
  EXPECT_FALSE(std::filesystem::exists(dir / "r.jsonl.tmp"));
}

TEST(RecordJson, ValidationErrorsNameTheLine) {
  const auto dir = fixture::scratch_dir("schema-errors");
  const std::string good =
      R"({"id":"a","image":"a.png","width":10,"height":10,"instruction":"i","bbox":[1,1,2,2],"source":"other","platform":"web"})";
  write_text(dir / "bad.jsonl", good + "\n\n{broken\n");
  try {
    read_records(dir / "bad.jsonl");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:3"), std::string::npos) << e.what();
  }
  write_text(dir / "box.jsonl", R"({"id":"a","image":"a.png","width":10,"height":10,"instruction":"i","bbox":[1,1,20,2],"source":"other","platform":"web"})");
  EXPECT_THROW(read_records(dir / "box.jsonl"), InputError);
  write_text(dir / "plat.jsonl", R"({"id":"a","image":"a.png","width":10,"height":10,"instruction":"i","bbox":[1,1,2,2],"source":"other","platform":"tv"})");
  EXPECT_THROW(read_records(dir / "plat.jsonl"), InputError);
  EXPECT_THROW(read_records(dir / "missing.jsonl"), InputError);
}

TEST(OtherRows, Shapes) {
  RankerTriplet t{"id#neg#o", "a.png", {10, 10}, "text", {1, 2, 3, 4}, Label::Negative, TripletOrigin::BenchmarkNeg};
  EXPECT_EQ(dump_row(triplet_to_json(t)),
            R"({"id":"id#neg#o","image":"a.png","text":"text","bbox":[1,2,3,4],"label":"negative","origin":"benchmark-neg"})");
  auto back = triplet_from_json(Json::parse(dump_row(triplet_to_json(t))));
  EXPECT_EQ(back.box, t.box);
  EXPECT_EQ(back.origin, t.origin);

  EXPECT_EQ(dump_row(reward_output_to_json("r", RewardBreakdown{1, 0, 1, 2})),
            R"({"id":"r","format":1,"solution":0,"length":1,"total":2})");
  auto in = reward_input_from_json(Json::parse(R"({"id":"q","text":"t","gt_bbox":[0,0,5,5]})"));
  EXPECT_EQ(in.gt, (BBox{0, 0, 5, 5}));

  DifficultyOutcome o{"r1", GroundResult{"raw", BBox{1, 1, 2, 2}, {28, 56}}, Difficulty::Easy};
  EXPECT_EQ(outcome_from_json(Json::parse(dump_row(outcome_to_json(o)))), o);
  DifficultyOutcome none{"r2", GroundResult{"raw", std::nullopt, {28, 56}}, Difficulty::Hard};
  EXPECT_EQ(outcome_from_json(Json::parse(dump_row(outcome_to_json(none)))), none);
}

TEST(Embeddings, DimensionMismatchIsFatal) {
  const auto dir = fixture::scratch_dir("schema-embed");
  write_jsonl(dir / "e.jsonl", {embedding_to_json("a", {1, 2, 3}), embedding_to_json("b", {4, 5, 6})});
  const auto m = read_embeddings(dir / "e.jsonl");
  EXPECT_EQ(m.ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(m.rows(1, 2), 6.0);
  write_jsonl(dir / "bad.jsonl", {embedding_to_json("a", {1, 2, 3}), embedding_to_json("b", {4, 5})});
  EXPECT_THROW(read_embeddings(dir / "bad.jsonl"), ConsistencyError);
}

TEST(Digest, OrderIndependentAndContentSensitive) {
  const std::vector<std::pair<std::string, std::string>> a = {{"x", "1"}, {"y", "2"}, {"z", "3"}};
  const std::vector<std::pair<std::string, std::string>> b = {{"z", "3"}, {"x", "1"}, {"y", "2"}};
  EXPECT_EQ(content_digest(a), content_digest(b));
  auto c = a;
  c[1].second = "2 ";
  EXPECT_NE(content_digest(a), content_digest(c));
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_NE(mix_seed(1, "a"), mix_seed(1, "b"));
  EXPECT_EQ(mix_seed(1, "a"), mix_seed(1, "a"));
}

TEST(PipelineConfigTest, DefaultsAndRelativePaths) {
  const auto dir = fixture::scratch_dir("config-defaults");
  write_records(dir / "aria.jsonl", fixture::synth_records(3, 1));
  write_text(dir / "c.json", R"({"seed": 7, "datasets": [{"source": "AriaUI-Desktop", "path": "aria.jsonl", "downsample": 0.1}]})");
  const auto cfg = PipelineConfig::load(dir / "c.json");
  EXPECT_EQ(cfg.seed, 7u);
  ASSERT_EQ(cfg.datasets.size(), 1u);
  EXPECT_EQ(cfg.datasets[0].path, dir / "aria.jsonl");
  EXPECT_TRUE(cfg.datasets[0].cluster);  // AriaUI sources cluster by default
  EXPECT_DOUBLE_EQ(cfg.diversity.ratio, 0.1);
  EXPECT_EQ(cfg.diversity.target_dim, 768u);
  EXPECT_EQ(cfg.reward.token_limit, 100u);
  EXPECT_EQ(cfg.eligibility.threshold(Source::AriaUIMobile), 5u);
  EXPECT_EQ(cfg.stage_order, kFilterStages);
  const auto cc = cfg.client_for("difficulty");
  EXPECT_EQ(cc.resize.min_pixels, 3136);
  EXPECT_EQ(cc.resize.max_pixels, 846720);
  EXPECT_EQ(dump_row(cfg.to_json()), dump_row(PipelineConfig::load(dir / "c.json").to_json()));
}

TEST(PipelineConfigTest, Overrides) {
  const auto dir = fixture::scratch_dir("config-overrides");
  write_records(dir / "d.jsonl", fixture::synth_records(3, 1));
  write_text(dir / "c.json", R"({
    "seed": 1, "mock": true, "output_dir": "out",
    "datasets": [{"source": "ShowUI-Desktop", "path": "d.jsonl", "cluster": true}],
    "clients": {"alignment": {"endpoint": "http://h/v1", "model": "judge", "max_in_flight": 2, "retry_limit": 5}},
    "eligibility": {"AriaUI-Web": 3},
    "diversity": {"ratio": 0.25, "target_dim": 16, "metric": "cosine"},
    "reward": {"token_limit": 50, "tokenizer": "bytes"},
    "traces": {"enabled": true, "line_width": 4, "color": [0, 255, 0], "max_sentences": 3},
    "stage_order": ["alignment", "difficulty", "ambiguity", "diversity"]
  })");
  const auto cfg = PipelineConfig::load(dir / "c.json");
  EXPECT_TRUE(cfg.mock);
  EXPECT_EQ(cfg.output_dir, dir / "out");
  EXPECT_EQ(cfg.client_for("alignment").model, "judge");
  EXPECT_EQ(cfg.client_for("alignment").retry_limit, 5u);
  EXPECT_EQ(cfg.eligibility.threshold(Source::AriaUIWeb), 3u);
  EXPECT_EQ(cfg.diversity.metric, DistanceMetric::Cosine);
  EXPECT_EQ(cfg.reward.tokenizer, TokenCounter::BytesApprox);
  EXPECT_EQ(cfg.traces.style.color, (Rgb{0, 255, 0}));
  EXPECT_EQ(cfg.stage_order.front(), "alignment");
}

TEST(PipelineConfigTest, Rejections) {
  const auto dir = fixture::scratch_dir("config-errors");
  write_records(dir / "d.jsonl", fixture::synth_records(3, 1));
  auto expect_bad = [&](const std::string& body) {
    write_text(dir / "c.json", body);
    EXPECT_THROW(PipelineConfig::load(dir / "c.json"), InputError) << body;
  };
  expect_bad(R"({"datasets": []})");  // no seed
  expect_bad(R"({"seed": -1})");
  expect_bad(R"({"seed": 1, "datasets": [{"path": "nope.jsonl"}]})");
  expect_bad(R"({"seed": 1, "datasets": [{"path": "d.jsonl", "downsample": 0}]})");
  expect_bad(R"({"seed": 1, "diversity": {"ratio": 2}})");
  expect_bad(R"({"seed": 1, "diversity": {"metric": "manhattan"}})");
  expect_bad(R"({"seed": 1, "stage_order": ["difficulty", "difficulty", "alignment", "ambiguity"]})");
  expect_bad(R"({"seed": 1, "clients": {"difficulty": {"max_in_flight": 0}}})");
  expect_bad(R"({"seed": 1, "eligibility": {"AriaUI-Web": 0}})");
  expect_bad("{not json");
}

TEST(Downsample, SizeDeterminismAndSubset) {
  const auto recs = fixture::synth_records(400, 12);
  const auto a = downsample(recs, 0.25, 9);
  EXPECT_EQ(a.size(), 100u);
  EXPECT_EQ(a, downsample(recs, 0.25, 9));
  EXPECT_NE(a, downsample(recs, 0.25, 10));
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), [](auto& x, auto& y) { return x.id < y.id; }));
  std::set<std::string> all;
  for (const auto& r : recs) all.insert(r.id);
  for (const auto& r : a) EXPECT_TRUE(all.count(r.id));
  EXPECT_EQ(downsample(recs, 1.0, 1).size(), recs.size());
  EXPECT_EQ(downsample(recs, 1e-6, 1).size(), 1u);
  EXPECT_EQ(downsample({}, 0.5, 1).size(), 0u);
}

TEST(BenchmarkIo, ScreenSpotConversion) {
  const auto dir = fixture::scratch_dir("screenspot");
  save_png(RgbImage(64, 48), dir / "b.png");
  write_text(dir / "ss.json", R"([
    {"img_filename": "a.png", "bbox": [10, 20, 30, 40], "instruction": "open menu", "data_type": "icon",
     "data_source": "android", "img_size": [100, 200]},
    {"img_filename": "b.png", "bbox": [1, 2, 3, 4], "instruction": "close", "data_type": "text",
     "data_source": "macos"}
  ])");
  const auto recs = read_screenspot(dir / "ss.json", dir);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].id, "mobile-00000");
  EXPECT_EQ(recs[0].gt_box, (BBox{10, 20, 40, 60}));
  EXPECT_EQ(recs[0].dims, (ImageDims{100, 200}));
  EXPECT_EQ(recs[0].elem_type, ElemType::Icon);
  EXPECT_EQ(recs[1].id, "desktop-00001");
  EXPECT_EQ(recs[1].dims, (ImageDims{64, 48}));
  EXPECT_EQ(recs[1].elem_type, ElemType::Text);
  EXPECT_EQ(read_screenspot(dir / "ss.json", dir, Platform::Web)[1].platform, Platform::Web);
  EXPECT_EQ(read_benchmark(dir / "ss.json", dir).size(), 2u);

  write_records(dir / "r.jsonl", recs);
  EXPECT_EQ(read_benchmark(dir / "r.jsonl", dir), recs);

  write_text(dir / "bad.json", R"([{"img_filename": "a.png", "bbox": [10, 20, -3, 4], "instruction": "x",
    "data_type": "icon", "img_size": [100, 200]}])");
  EXPECT_THROW(read_screenspot(dir / "bad.json", dir), InputError);
}

TEST(BenchmarkIo, OsWorldGSkipsNonBoxes) {
  const auto dir = fixture::scratch_dir("osworldg");
  write_text(dir / "g.json", R"([
    {"id": "g1", "image_path": "s.png", "image_size": [800, 600], "instruction": "a", "box_type": "bbox",
     "box_coordinates": [5, 5, 10, 10]},
    {"id": "g2", "image_path": "s.png", "image_size": [800, 600], "instruction": "b", "box_type": "polygon",
     "box_coordinates": [1, 1, 2, 2, 3, 3]}
  ])");
  std::size_t skipped = 0;
  const auto recs = read_osworld_g(dir / "g.json", &skipped);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(skipped, 1u);
  EXPECT_EQ(recs[0].gt_box, (BBox{5, 5, 15, 15}));
}
