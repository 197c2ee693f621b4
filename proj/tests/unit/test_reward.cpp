#include <gtest/gtest.h>

#include <regex>
#include <string>

#include "curate/errors.hpp"
#include "curate/random.hpp"
#include "curate/reward.hpp"

using namespace curate;

namespace {

// Independent format oracle built on std::regex.
bool format_oracle(const std::string& text) {
  static const std::string num = R"([+-]?(?:\d+(?:\.\d*)?|\.\d+))";
  static const std::regex re("^<think>([\\s\\S]*?)</think>\\s*<answer>\\s*\\[\\s*" + num + "\\s*,\\s*" + num +
                             "\\s*,\\s*" + num + "\\s*,\\s*" + num + "\\s*\\]\\s*</answer>$");
  std::smatch m;
  if (!std::regex_match(text, m, re)) return false;
  const std::string thought = m[1];
  if (thought.find_first_not_of(" \t\n\r\f\v") == std::string::npos) return false;
  for (const char* tag : {"<think>", "</think>", "<answer>", "</answer>"}) {
    if (thought.find(tag) != std::string::npos) return false;
  }
  return true;
}

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
  return s;
}

std::string fuzz_text(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "<think>", "</think>", "<answer>", "</answer>", "[", "]", ",", " ", "\n", "12", "3.5", "-4", ".5", "7.",
      "click", "the", "<answ", "er>", "[1,2,3,4]", "[10, 20, 30, 40]", "x", "\t", "1e3"};
  std::string s;
  const auto n = uniform_index(rng, 24);
  for (std::uint64_t i = 0; i < n; ++i) s += pieces[uniform_index(rng, pieces.size())];
  return s;
}

std::string well_formed(Rng& rng) {
  auto num = [&] { return std::to_string(uniform_index(rng, 2000)); };
  std::string s = "<think>" + words(1 + uniform_index(rng, 150)) + "</think>";
  if (bernoulli(rng, 0.5)) s += "\n";
  s += "<answer>[" + num() + "," + num() + ", " + num() + " ," + num() + "]</answer>";
  return s;
}

}  // namespace

TEST(Reward, CanonicalExamples) {
  const auto a = reward_breakdown(
      "<think>To play the next song, I should click on the right arrow icon.</think><answer>[445,1016,508,1053]</answer>",
      BBox{440, 1000, 520, 1060});
  EXPECT_EQ(a.format, 1);
  EXPECT_EQ(a.solution, 1);
  EXPECT_EQ(a.length, 1);
  EXPECT_EQ(a.total, 3);

  const auto b = reward_breakdown("click here", BBox{0, 0, 10, 10});
  EXPECT_EQ((std::array{b.format, b.solution, b.length, b.total}), (std::array{0, 0, 1, 1}));

  const std::string long_text = "<think>" + words(120) + "</think><answer>[0,0,10,10]</answer>";
  const auto c = reward_breakdown(long_text, BBox{100, 100, 200, 200});
  EXPECT_EQ((std::array{c.format, c.solution, c.length, c.total}), (std::array{1, 0, 0, 1}));
}

TEST(Reward, LengthThresholdIsInclusive) {
  RewardConfig cfg;
  cfg.token_limit = 5;
  EXPECT_EQ(count_tokens("  a b\tc\nd e  ", cfg), 5u);
  EXPECT_EQ(reward_breakdown("a b c d e", BBox{0, 0, 1, 1}, cfg).length, 1);
  EXPECT_EQ(reward_breakdown("a b c d e f", BBox{0, 0, 1, 1}, cfg).length, 0);
  cfg.tokenizer = TokenCounter::BytesApprox;
  EXPECT_EQ(count_tokens("abcdefgh", cfg), 2u);
  EXPECT_EQ(count_tokens("abcdefghi", cfg), 3u);
}

TEST(Reward, ExternalCounterAndValidation) {
  RewardConfig cfg;
  cfg.tokenizer = TokenCounter::External;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg.external_counter = [](std::string_view s) { return s.size(); };
  cfg.token_limit = 3;
  EXPECT_EQ(reward_breakdown("abcd", BBox{0, 0, 1, 1}, cfg).length, 0);
  cfg.token_limit = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  EXPECT_EQ(parse_token_counter("whitespace"), TokenCounter::Whitespace);
  EXPECT_THROW(parse_token_counter("bpe"), InputError);
}

TEST(Reward, TagNamesGrammarCounterAndScope) {
  RewardConfig cfg;
  EXPECT_EQ(cfg.tag(), "think-answer/v1;tokens=whitespace;limit=100;scope=full-text");
}

TEST(Format, GrammarCases) {
  EXPECT_TRUE(matches_format("<think>a</think><answer>[1,2,3,4]</answer>"));
  EXPECT_TRUE(matches_format("<think> a </think> \n <answer> [1.5, 2, 3, 4] </answer>"));
  EXPECT_FALSE(matches_format("<think> </think><answer>[1,2,3,4]</answer>"));        // blank thought
  EXPECT_FALSE(matches_format(" <think>a</think><answer>[1,2,3,4]</answer>"));       // leading text
  EXPECT_FALSE(matches_format("<think>a</think><answer>[1,2,3,4]</answer>\n"));      // trailing text
  EXPECT_FALSE(matches_format("<think>a</think>x<answer>[1,2,3,4]</answer>"));
  EXPECT_FALSE(matches_format("<think>a</think><answer>[1,2,3]</answer>"));
  EXPECT_FALSE(matches_format("<think>a</think><answer>[1,2,3,4] [5,6,7,8]</answer>"));
  EXPECT_FALSE(matches_format("<think>a<answer>[0,0,1,1]</answer></think><answer>[1,2,3,4]</answer>"));
  EXPECT_FALSE(matches_format("<answer>[1,2,3,4]</answer>"));
}

TEST(ExtractAnswer, AnswerSpanIsAuthoritative) {
  EXPECT_EQ(extract_answer("<think>[1,1,2,2]</think><answer>[5,5,9,9]</answer>"), (BBox{5, 5, 9, 9}));
  // An answer span without a tuple yields nothing, even if the thought has one.
  EXPECT_FALSE(extract_answer("<think>[1,1,2,2]</think><answer>none</answer>"));
  EXPECT_EQ(extract_answer("no spans, box [3,3,6,6]"), (BBox{3, 3, 6, 6}));
}

TEST(Format, AgreesWithRegexOracleOnFuzzedText) {
  Rng rng(31);
  std::size_t positives = 0;
  for (int i = 0; i < 20000; ++i) {
    const std::string s = (i % 3 == 0) ? well_formed(rng) : fuzz_text(rng);
    const bool oracle = format_oracle(s);
    ASSERT_EQ(matches_format(s), oracle) << s;
    positives += oracle;
  }
  EXPECT_GT(positives, 5000u);
}

TEST(Reward, TotalIsSumOfBinaryComponents) {
  Rng rng(32);
  for (int i = 0; i < 20000; ++i) {
    const std::string s = (i % 2 == 0) ? well_formed(rng) : fuzz_text(rng);
    const BBox gt{static_cast<double>(uniform_index(rng, 1000)), static_cast<double>(uniform_index(rng, 1000)),
                  1000.0 + static_cast<double>(uniform_index(rng, 1000)), 1000.0 + static_cast<double>(uniform_index(rng, 1000))};
    const auto r = reward_breakdown(s, gt);
    ASSERT_EQ(r.total, r.format + r.solution + r.length);
    for (int c : {r.format, r.solution, r.length}) ASSERT_TRUE(c == 0 || c == 1);
    const auto box = extract_answer(s);
    ASSERT_EQ(r.solution == 1, box && center_hit(*box, gt));
  }
}
