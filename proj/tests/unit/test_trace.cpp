#include <gtest/gtest.h>

#include <fstream>
#include <iterator>

#include "curate/errors.hpp"
#include "curate/image.hpp"
#include "curate/trace.hpp"
#include "synth.hpp"

using namespace curate;

namespace {

RgbImage checkerboard(std::int64_t w, std::int64_t h) {
  RgbImage img(w, h);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      const auto v = static_cast<std::uint8_t>(((x / 4 + y / 4) % 2) ? 200 : 40);
      img.set(x, y, {v, v, v});
    }
  }
  return img;
}

GroundingRecord record_on(const std::string& image, ImageDims dims, BBox box) {
  GroundingRecord r;
  r.id = "t1";
  r.image = image;
  r.dims = dims;
  r.instruction = "Open the File menu";
  r.gt_box = box;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(CotPrompt, TemplateHasOneSlotAndResponseFormat) {
  const std::string_view t = cot_prompt_template();
  const auto first = t.find(kInstructionSlot);
  ASSERT_NE(first, std::string_view::npos);
  EXPECT_EQ(t.find(kInstructionSlot, first + 1), std::string_view::npos);
  EXPECT_NE(t.find("{\"response\": <response>}"), std::string_view::npos);
  EXPECT_NE(t.find("2 sentences at most"), std::string_view::npos);
  const auto p = render_cot_prompt("Select Lohit Assamese font");
  EXPECT_EQ(p.find(kInstructionSlot), std::string::npos);
  EXPECT_NE(p.find("the instruction: Select Lohit Assamese font."), std::string::npos);
}

TEST(Overlay, DrawsOutlineOnACopy) {
  const RgbImage shot = checkerboard(64, 48);
  const auto rec = record_on("mem.png", {64, 48}, {10, 8, 30.5, 20});
  const OverlayStyle style{2, {255, 0, 0}};
  const auto req = build_trace_request(rec, shot, style);
  EXPECT_EQ(shot.pixels, checkerboard(64, 48).pixels);  // source untouched
  const Rgb red{255, 0, 0};
  // Box snaps outward to pixels [10, 30] x [8, 19].
  for (std::int64_t y = 0; y < 48; ++y) {
    for (std::int64_t x = 0; x < 64; ++x) {
      const bool inside = x >= 10 && x <= 30 && y >= 8 && y <= 19;
      const bool ring = inside && (x < 12 || x > 28 || y < 10 || y > 17);
      if (ring) {
        ASSERT_EQ(req.image.at(x, y), red) << x << "," << y;
      } else {
        ASSERT_EQ(req.image.at(x, y), shot.at(x, y)) << x << "," << y;
      }
    }
  }
  EXPECT_EQ(decode_png(req.png).pixels, req.image.pixels);
  EXPECT_EQ(req.overlay_box, rec.gt_box);
  EXPECT_NE(req.prompt.find("Open the File menu"), std::string::npos);
}

TEST(Overlay, FileOnDiskIsNeverModified) {
  const auto dir = fixture::scratch_dir("trace-file");
  save_png(checkerboard(40, 30), dir / "shot.png");
  const std::string before = slurp(dir / "shot.png");
  const auto rec = record_on("shot.png", {40, 30}, {5, 5, 15, 15});
  const auto req = build_trace_request(rec, OverlayStyle{}, dir.string());
  EXPECT_EQ(slurp(dir / "shot.png"), before);
  EXPECT_EQ(req.image.at(5, 5), (Rgb{255, 0, 0}));
}

TEST(Overlay, Errors) {
  const auto rec = record_on("x.png", {64, 48}, {10, 8, 70, 20});
  EXPECT_THROW(build_trace_request(rec, checkerboard(64, 48)), InputError);
  const auto missing = record_on("/no/such/file.png", {64, 48}, {1, 1, 2, 2});
  EXPECT_THROW(build_trace_request(missing), InputError);
  RgbImage img = checkerboard(8, 8);
  EXPECT_THROW(draw_box_outline(img, {1, 1, 2, 2}, 0, {0, 0, 0}), InputError);
  EXPECT_THROW(decode_png("not a png"), InputError);
}

TEST(Sentences, Heuristic) {
  EXPECT_EQ(count_sentences(""), 0u);
  EXPECT_EQ(count_sentences("One."), 1u);
  EXPECT_EQ(count_sentences("One. Two!"), 2u);
  EXPECT_EQ(count_sentences("One. Two? Three"), 3u);
  EXPECT_EQ(count_sentences("Version 2.5 is shown... really?!"), 2u);
  EXPECT_EQ(count_sentences("Click the 'File' menu.Then save."), 1u);
  EXPECT_EQ(count_sentences(" ... "), 0u);
}

TEST(TraceValidation, ReportsViolations) {
  auto ok = parse_and_validate_trace(R"({"response": "The window is a text editor. The menu is at the top."})");
  EXPECT_TRUE(ok.clean());
  EXPECT_EQ(ok.trace, "The window is a text editor. The menu is at the top.");

  auto three = parse_and_validate_trace(R"({"response": "One. Two. Three."})");
  EXPECT_EQ(three.violations, std::vector<TraceViolation>{TraceViolation::TooManySentences});

  auto red = parse_and_validate_trace(R"({"response": "The Red Box marks the icon."})");
  EXPECT_EQ(red.violations, std::vector<TraceViolation>{TraceViolation::MentionsHighlight});

  auto both = parse_and_validate_trace(R"({"response": "A. B. The highlighted button."})");
  EXPECT_EQ(both.violations.size(), 2u);

  auto empty = parse_and_validate_trace(R"({"response": "   "})");
  EXPECT_EQ(empty.violations, std::vector<TraceViolation>{TraceViolation::Empty});
}

TEST(TraceValidation, FenceToleratedAndParseErrorsCarryRaw) {
  auto fenced = parse_and_validate_trace("```json\n{\"response\": \"A dialog. The OK button.\"}\n```");
  EXPECT_TRUE(fenced.clean());
  for (const char* bad : {"plain text", "{\"answer\": \"x\"}", "{\"response\": 3}", "[1]"}) {
    try {
      parse_and_validate_trace(bad);
      ADD_FAILURE() << bad;
    } catch (const TraceParseError& e) {
      EXPECT_EQ(e.raw(), bad);
    }
  }
}

TEST(TraceValidation, CustomRules) {
  TraceRules rules;
  rules.max_sentences = 3;
  rules.forbidden_phrases = {"outline"};
  EXPECT_TRUE(parse_and_validate_trace(R"({"response": "One. Two. Three. The red box."})", rules).violations ==
              std::vector<TraceViolation>{TraceViolation::TooManySentences});
  EXPECT_EQ(parse_and_validate_trace(R"({"response": "See the OUTLINE."})", rules).violations,
            std::vector<TraceViolation>{TraceViolation::MentionsHighlight});
}
