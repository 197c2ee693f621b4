#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <string>

#include "curate/errors.hpp"
#include "curate/geometry.hpp"
#include "curate/random.hpp"

using namespace curate;

namespace {

// Integer-exact reference: center of [a, b] lies in [lo, hi] iff 2lo <= a + b <= 2hi.
bool hit_oracle(std::int64_t px1, std::int64_t py1, std::int64_t px2, std::int64_t py2, std::int64_t gx1,
                std::int64_t gy1, std::int64_t gx2, std::int64_t gy2) {
  return 2 * gx1 <= px1 + px2 && px1 + px2 <= 2 * gx2 && 2 * gy1 <= py1 + py2 && py1 + py2 <= 2 * gy2;
}

BBox random_int_box(Rng& rng, std::int64_t extent) {
  for (;;) {
    auto a = static_cast<double>(uniform_index(rng, extent));
    auto b = static_cast<double>(uniform_index(rng, extent));
    auto c = static_cast<double>(uniform_index(rng, extent));
    auto d = static_cast<double>(uniform_index(rng, extent));
    if (auto box = BBox::from_corners(a, b, c, d)) return *box;
  }
}

}  // namespace

TEST(CenterHit, MatchesIntegerOracleOnRandomPairs) {
  Rng rng(7);
  std::size_t hits = 0;
  for (int i = 0; i < 10000; ++i) {
    // Small extent so that boundary coincidences are frequent.
    const BBox p = random_int_box(rng, 40);
    const BBox g = random_int_box(rng, 40);
    const bool expected = hit_oracle(static_cast<std::int64_t>(p.x1), static_cast<std::int64_t>(p.y1),
                                     static_cast<std::int64_t>(p.x2), static_cast<std::int64_t>(p.y2),
                                     static_cast<std::int64_t>(g.x1), static_cast<std::int64_t>(g.y1),
                                     static_cast<std::int64_t>(g.x2), static_cast<std::int64_t>(g.y2));
    ASSERT_EQ(center_hit(p, g), expected) << i;
    hits += expected;
  }
  EXPECT_GT(hits, 500u);
  EXPECT_LT(hits, 9500u);
}

TEST(CenterHit, BoundaryIsInclusive) {
  const BBox gt{10, 10, 20, 20};
  EXPECT_TRUE(center_hit({0, 0, 20, 20}, gt));    // center (10, 10), the corner
  EXPECT_FALSE(center_hit({20, 19, 20.5, 21}, gt));  // center (20.25, 20)
  EXPECT_TRUE(center_hit({18, 18, 22, 22}, gt));  // center (20, 20)
  EXPECT_FALSE(center_hit({18, 18, 22.002, 22}, gt));
  EXPECT_TRUE(point_in_box({15, 10}, gt));
  EXPECT_FALSE(point_in_box({15, 9.999}, gt));
}

TEST(BBoxTest, ValidityAndCorners) {
  EXPECT_TRUE((BBox{0, 0, 1, 1}.valid()));
  EXPECT_FALSE((BBox{1, 0, 1, 1}.valid()));
  EXPECT_FALSE((BBox{-1, 0, 1, 1}.valid()));
  EXPECT_FALSE((BBox{0, 0, NAN, 1}.valid()));
  auto b = BBox::from_corners(30, 40, 10, 20);
  ASSERT_TRUE(b);
  EXPECT_EQ(*b, (BBox{10, 20, 30, 40}));
  EXPECT_FALSE(BBox::from_corners(5, 5, 5, 9));
  EXPECT_TRUE((ImageDims{100, 50}.contains({0, 0, 100, 50})));
  EXPECT_FALSE((ImageDims{100, 50}.contains({0, 0, 100.5, 50})));
}

TEST(ParseBBox, PrefersTupleInsideAnswer) {
  auto b = parse_bbox("<think>near [1,2,3,4]</think><answer>[10, 20, 30, 40]</answer>");
  ASSERT_TRUE(b);
  EXPECT_EQ(*b, (BBox{10, 20, 30, 40}));
}

TEST(ParseBBox, FallsBackToFirstTuple) {
  auto b = parse_bbox("The box is [ 5.5 ,6, 7.25, 8 ] or maybe [1,1,2,2]");
  ASSERT_TRUE(b);
  EXPECT_EQ(*b, (BBox{5.5, 6, 7.25, 8}));
  // Answer span without a tuple falls back to the whole text.
  auto c = parse_bbox("[1,2,3,4] <answer>none</answer>");
  ASSERT_TRUE(c);
  EXPECT_EQ(*c, (BBox{1, 2, 3, 4}));
}

TEST(ParseBBox, SkipsMalformedTuples) {
  auto b = parse_bbox("[1,2,3] [a,b,c,d] [1,2,3,4,5] [9, 8, 7, 6]");
  ASSERT_TRUE(b);
  EXPECT_EQ(*b, (BBox{7, 6, 9, 8}));
}

TEST(ParseBBox, RejectsDegenerateAndMissing) {
  EXPECT_FALSE(parse_bbox(""));
  EXPECT_FALSE(parse_bbox("no box here"));
  EXPECT_FALSE(parse_bbox("[1, 1, 1, 5]"));
  EXPECT_FALSE(parse_bbox("[-5, 0, 10, 10]"));
  EXPECT_FALSE(parse_bbox("[1e3, 0, 10, 10]"));
}

TEST(ParseBBox, NeverThrowsOnFuzzedInput) {
  Rng rng(11);
  const std::string alphabet = "[]<>/,.-+ 0123456789answerthink\n";
  for (int i = 0; i < 20000; ++i) {
    std::string s(uniform_index(rng, 60), ' ');
    for (auto& c : s) c = alphabet[uniform_index(rng, alphabet.size())];
    auto b = parse_bbox(s);
    if (b) {
      ASSERT_TRUE(b->valid()) << s;
    }
  }
}

TEST(ParseExactTuple, AcceptsOnlyOneTuple) {
  EXPECT_TRUE(parse_exact_tuple(" [1, 2.5, 3, 4] "));
  EXPECT_FALSE(parse_exact_tuple("[1, 2, 3, 4] x"));
  EXPECT_FALSE(parse_exact_tuple("x [1, 2, 3, 4]"));
  EXPECT_FALSE(parse_exact_tuple("[1, 2, 3]"));
}

TEST(AnswerSpan, FirstCompleteSpan) {
  EXPECT_EQ(answer_span("a<answer>x</answer><answer>y</answer>").value(), "x");
  EXPECT_FALSE(answer_span("<answer>open"));
}

TEST(Rescale, PerAxis) {
  const BBox b = rescale_bbox({10, 20, 30, 40}, {100, 200}, {200, 100});
  EXPECT_DOUBLE_EQ(b.x1, 20);
  EXPECT_DOUBLE_EQ(b.y1, 10);
  EXPECT_DOUBLE_EQ(b.x2, 60);
  EXPECT_DOUBLE_EQ(b.y2, 20);
  EXPECT_THROW(rescale_bbox({0, 0, 1, 1}, {0, 10}, {10, 10}), InputError);
}

TEST(Rescale, RoundTripIsStable) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const ImageDims a{1 + static_cast<std::int64_t>(uniform_index(rng, 4000)),
                      1 + static_cast<std::int64_t>(uniform_index(rng, 4000))};
    const ImageDims m = smart_resize(a).dims;
    const BBox box{uniform01(rng) * 10, uniform01(rng) * 10, 10 + uniform01(rng) * 10, 10 + uniform01(rng) * 10};
    const BBox back = rescale_bbox(rescale_bbox(box, a, m), m, a);
    EXPECT_NEAR(back.x1, box.x1, 1e-9);
    EXPECT_NEAR(back.y2, box.y2, 1e-9);
  }
}

// Values produced by an independent reimplementation of the reference resize
// (round-half-even, floor when shrinking, ceil when growing).
TEST(SmartResize, FrozenReferenceValues) {
  struct Case {
    ImageDims in, out;
  };
  const Case cases[] = {
      {{1920, 1080}, {1204, 672}}, {{100, 100}, {112, 112}}, {{2560, 1440}, {1204, 672}},
      {{1080, 2340}, {616, 1344}}, {{375, 812}, {364, 812}}, {{3840, 2160}, {1204, 672}},
      {{1280, 800}, {1148, 700}},  {{42, 42}, {56, 56}},     {{70, 70}, {56, 56}},
      {{56, 56}, {56, 56}},        {{1366, 768}, {1204, 672}}, {{1, 1}, {56, 56}},
  };
  for (const auto& c : cases) {
    const auto r = smart_resize(c.in);
    EXPECT_EQ(r.dims, c.out) << c.in.width << "x" << c.in.height;
    EXPECT_EQ(r.clamped, c.in.width == 1) << c.in.width << "x" << c.in.height;
  }
}

TEST(SmartResize, PropertiesOnRandomDims) {
  Rng rng(3);
  const ResizeBounds bounds;
  for (int i = 0; i < 5000; ++i) {
    const ImageDims d{1 + static_cast<std::int64_t>(uniform_index(rng, 8000)),
                      1 + static_cast<std::int64_t>(uniform_index(rng, 8000))};
    const auto r = smart_resize(d, bounds);
    ASSERT_EQ(r.dims.width % 28, 0);
    ASSERT_EQ(r.dims.height % 28, 0);
    ASSERT_GE(r.dims.width, 28);
    ASSERT_GE(r.dims.height, 28);
    ASSERT_LE(r.dims.area(), bounds.max_pixels) << d.width << "x" << d.height;
    ASSERT_GE(r.dims.area(), bounds.min_pixels) << d.width << "x" << d.height;
  }
}

TEST(SmartResize, ExtremeAspectIsClampedAndFlagged) {
  const auto r = smart_resize({20000, 5});
  EXPECT_TRUE(r.clamped);
  EXPECT_EQ(r.dims.height, 28);
  EXPECT_LE(r.dims.area(), 846720);
  EXPECT_GE(r.dims.area(), 3136);
}

TEST(SmartResize, RejectsBadInput) {
  EXPECT_THROW(smart_resize({0, 10}), InputError);
  EXPECT_THROW(smart_resize({10, 10}, {0, 1, 2}), InputError);
  EXPECT_THROW(smart_resize({10, 10}, {28, 100, 10}), InputError);
}
