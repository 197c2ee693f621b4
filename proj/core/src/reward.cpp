#include "curate/reward.hpp"

#include <cctype>

#include "curate/errors.hpp"

namespace curate {

std::string_view to_string(TokenCounter t) noexcept {
  switch (t) {
    case TokenCounter::Whitespace: return "whitespace";
    case TokenCounter::BytesApprox: return "bytes-per-token-approx(4)";
    case TokenCounter::External: break;
  }
  return "external";
}

TokenCounter parse_token_counter(std::string_view s) {
  if (s == "whitespace") return TokenCounter::Whitespace;
  if (s == "bytes" || s == "bytes-per-token-approx(4)") return TokenCounter::BytesApprox;
  if (s == "external") return TokenCounter::External;
  throw InputError("unknown tokenizer '" + std::string(s) + "'");
}

std::string RewardConfig::tag() const {
  return grammar_version + ";tokens=" + std::string(to_string(tokenizer)) + ";limit=" + std::to_string(token_limit) +
         ";scope=full-text";
}

void RewardConfig::validate() const {
  if (token_limit < 1) throw InputError("reward token limit must be >= 1");
  if (tokenizer == TokenCounter::External && !external_counter) {
    throw InputError("external tokenizer selected but no counter supplied");
  }
}

std::optional<BBox> extract_answer(std::string_view text) noexcept {
  if (auto span = answer_span(text)) return first_bracketed_box(*span);
  return parse_bbox(text);
}

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

bool has_tag(std::string_view s) noexcept {
  return s.find(kThinkOpen) != std::string_view::npos || s.find(kAnswerOpen) != std::string_view::npos ||
         s.find(kAnswerClose) != std::string_view::npos;
}

bool blank(std::string_view s) noexcept {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

bool matches_format(std::string_view text) noexcept {
  if (!text.starts_with(kThinkOpen)) return false;
  const auto think_end = text.find(kThinkClose, kThinkOpen.size());
  if (think_end == std::string_view::npos) return false;
  const auto thought = text.substr(kThinkOpen.size(), think_end - kThinkOpen.size());
  if (blank(thought) || has_tag(thought)) return false;

  std::size_t i = think_end + kThinkClose.size();
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  auto rest = text.substr(i);
  if (!rest.starts_with(kAnswerOpen) || !rest.ends_with(kAnswerClose)) return false;
  if (rest.size() < kAnswerOpen.size() + kAnswerClose.size()) return false;
  const auto inner = rest.substr(kAnswerOpen.size(), rest.size() - kAnswerOpen.size() - kAnswerClose.size());
  return parse_exact_tuple(inner).has_value();
}

std::size_t count_tokens(std::string_view text, const RewardConfig& cfg) {
  switch (cfg.tokenizer) {
    case TokenCounter::Whitespace: {
      std::size_t tokens = 0;
      bool in_token = false;
      for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_token) ++tokens;
        in_token = !space;
      }
      return tokens;
    }
    case TokenCounter::BytesApprox:
      return (text.size() + 3) / 4;
    case TokenCounter::External:
      break;
  }
  return cfg.external_counter(text);
}

RewardBreakdown reward_breakdown(std::string_view text, const BBox& gt, const RewardConfig& cfg) {
  RewardBreakdown r;
  r.format = matches_format(text) ? 1 : 0;
  const auto box = extract_answer(text);
  r.solution = box && center_hit(*box, gt) ? 1 : 0;
  r.length = count_tokens(text, cfg) <= cfg.token_limit ? 1 : 0;
  r.total = r.format + r.solution + r.length;
  return r;
}

}  // namespace curate
