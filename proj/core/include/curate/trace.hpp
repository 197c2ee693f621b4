#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "curate/image.hpp"
#include "curate/record.hpp"

namespace curate {

// Versioned chain-of-thought prompt; "<instruction>" marks the substitution slot.
std::string_view cot_prompt_template();
inline constexpr std::string_view kCotPromptVersion = "cot-prompt/v1";
inline constexpr std::string_view kInstructionSlot = "<instruction>";

struct OverlayStyle {
  int line_width = 3;
  Rgb color = {255, 0, 0};
};

struct TraceRequest {
  std::string record_id;
  std::string prompt;
  RgbImage image;        // copy of the screenshot with the outline drawn
  std::string png;       // `image` encoded, ready to send
  BBox overlay_box;
};

std::string render_cot_prompt(std::string_view instruction);

// Reads the screenshot (relative paths resolve against `image_root`) and draws the
// ground-truth outline on an in-memory copy. The source file is never written.
TraceRequest build_trace_request(const GroundingRecord& record, const OverlayStyle& style = {},
                                 const std::string& image_root = {});

// Same, for an already-decoded screenshot.
TraceRequest build_trace_request(const GroundingRecord& record, const RgbImage& screenshot,
                                 const OverlayStyle& style = {});

enum class TraceViolation { TooManySentences, MentionsHighlight, Empty };
std::string_view to_string(TraceViolation v) noexcept;

struct TraceResult {
  std::string trace;
  std::vector<TraceViolation> violations;

  bool clean() const noexcept { return violations.empty(); }
};

struct TraceRules {
  std::size_t max_sentences = 2;
  std::vector<std::string> forbidden_phrases = {"red bounding box", "highlighted", "red box"};
};

// Counts runs of '.', '!' or '?' that end the text or precede whitespace; trailing
// text without terminal punctuation counts as one more sentence. Abbreviations are
// not special-cased.
std::size_t count_sentences(std::string_view text);

// Expects {"response": "..."} (an enclosing ```json fence is tolerated). Throws
// TraceParseError carrying the raw text otherwise.
TraceResult parse_and_validate_trace(std::string_view raw, const TraceRules& rules = {});

}  // namespace curate
