#include "curate/trace.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>

#include "curate/errors.hpp"

namespace curate {

std::string render_cot_prompt(std::string_view instruction) {
  std::string prompt(cot_prompt_template());
  const auto slot = prompt.find(kInstructionSlot);
  if (slot != std::string::npos) prompt.replace(slot, kInstructionSlot.size(), instruction);
  return prompt;
}

TraceRequest build_trace_request(const GroundingRecord& record, const RgbImage& screenshot, const OverlayStyle& style) {
  validate(record);
  if (!screenshot.dims().contains(record.gt_box)) {
    throw InputError("record " + record.id + ": ground-truth box exceeds the screenshot");
  }
  TraceRequest req;
  req.record_id = record.id;
  req.prompt = render_cot_prompt(record.instruction);
  req.image = screenshot;
  draw_box_outline(req.image, record.gt_box, style.line_width, style.color);
  req.png = encode_png(req.image);
  req.overlay_box = record.gt_box;
  return req;
}

TraceRequest build_trace_request(const GroundingRecord& record, const OverlayStyle& style,
                                 const std::string& image_root) {
  validate(record);
  std::filesystem::path path = record.image;
  if (!image_root.empty() && path.is_relative()) path = std::filesystem::path(image_root) / path;
  return build_trace_request(record, load_png(path), style);
}

std::string_view to_string(TraceViolation v) noexcept {
  switch (v) {
    case TraceViolation::TooManySentences: return "too-many-sentences";
    case TraceViolation::MentionsHighlight: return "mentions-highlight";
    case TraceViolation::Empty: break;
  }
  return "empty";
}

std::size_t count_sentences(std::string_view text) {
  std::size_t sentences = 0;
  bool pending = false;  // non-space content since the last terminator
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i;
      while (j + 1 < text.size() && (text[j + 1] == '.' || text[j + 1] == '!' || text[j + 1] == '?')) ++j;
      const bool ends = j + 1 >= text.size() || std::isspace(static_cast<unsigned char>(text[j + 1]));
      if (ends && pending) {
        ++sentences;
        pending = false;
      }
      i = j;
      continue;
    }
    if (!std::isspace(static_cast<unsigned char>(c))) pending = true;
  }
  return sentences + (pending ? 1 : 0);
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view strip_fence(std::string_view s) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
  };
  s = trim(s);
  if (s.starts_with("```") && s.ends_with("```") && s.size() >= 6) {
    s = s.substr(3, s.size() - 6);
    if (s.starts_with("json")) s.remove_prefix(4);
    s = trim(s);
  }
  return s;
}

}  // namespace

TraceResult parse_and_validate_trace(std::string_view raw, const TraceRules& rules) {
  const auto body = strip_fence(raw);
  const auto parsed = nlohmann::json::parse(body.begin(), body.end(), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("response") ||
      !parsed.at("response").is_string()) {
    throw TraceParseError("trace reply is not a {\"response\": ...} object", std::string(raw));
  }
  TraceResult out;
  out.trace = parsed.at("response").get<std::string>();

  const bool empty = std::all_of(out.trace.begin(), out.trace.end(),
                                 [](unsigned char c) { return std::isspace(c) != 0; });
  if (empty) {
    out.violations.push_back(TraceViolation::Empty);
    return out;
  }
  if (count_sentences(out.trace) > rules.max_sentences) out.violations.push_back(TraceViolation::TooManySentences);
  const std::string haystack = lower(out.trace);
  const bool mentions = std::any_of(rules.forbidden_phrases.begin(), rules.forbidden_phrases.end(),
                                    [&](const std::string& p) { return !p.empty() && haystack.find(lower(p)) != std::string::npos; });
  if (mentions) out.violations.push_back(TraceViolation::MentionsHighlight);
  return out;
}

}  // namespace curate
