#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "curate/geometry.hpp"

namespace curate {

enum class TokenCounter { Whitespace, BytesApprox, External };
std::string_view to_string(TokenCounter t) noexcept;
TokenCounter parse_token_counter(std::string_view s);

struct RewardConfig {
  std::size_t token_limit = 100;
  TokenCounter tokenizer = TokenCounter::Whitespace;
  // Required when tokenizer == External; must be thread-safe.
  std::function<std::size_t(std::string_view)> external_counter;
  std::string grammar_version = "think-answer/v1";

  // Identifies the grammar, counter and limit so reward logs stay comparable.
  // Length is always measured over the full rollout text.
  std::string tag() const;
  void validate() const;
};

struct RewardBreakdown {
  int format = 0;
  int solution = 0;
  int length = 0;
  int total = 0;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

// Box inside the first <answer> span when one exists (absent if that span holds no
// tuple); otherwise parse_bbox over the whole text.
std::optional<BBox> extract_answer(std::string_view text) noexcept;

// "<think>" non-blank text "</think>", optional whitespace, then "<answer>" holding
// exactly one numeric 4-tuple "</answer>", and nothing before or after.
bool matches_format(std::string_view text) noexcept;

std::size_t count_tokens(std::string_view text, const RewardConfig& cfg);

// format + solution + length, each 0 or 1, summed without scaling. Never throws on
// malformed text.
RewardBreakdown reward_breakdown(std::string_view text, const BBox& gt, const RewardConfig& cfg = {});

}  // namespace curate
