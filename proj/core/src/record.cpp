#include "curate/record.hpp"

#include <algorithm>
#include <unordered_set>

#include "curate/errors.hpp"

namespace curate {

std::string_view to_string(Source s) noexcept {
  switch (s) {
    case Source::AriaUIDesktop: return "AriaUI-Desktop";
    case Source::AriaUIMobile: return "AriaUI-Mobile";
    case Source::AriaUIWeb: return "AriaUI-Web";
    case Source::ShowUIDesktop: return "ShowUI-Desktop";
    case Source::Other: break;
  }
  return "other";
}

std::string_view to_string(Platform p) noexcept {
  switch (p) {
    case Platform::Mobile: return "mobile";
    case Platform::Desktop: return "desktop";
    case Platform::Web: break;
  }
  return "web";
}

std::string_view to_string(ElemType e) noexcept {
  return e == ElemType::Text ? "text" : "icon";
}

std::string_view to_string(Label l) noexcept {
  return l == Label::Positive ? "positive" : "negative";
}

Source parse_source(std::string_view s) noexcept {
  if (s == "AriaUI-Desktop") return Source::AriaUIDesktop;
  if (s == "AriaUI-Mobile") return Source::AriaUIMobile;
  if (s == "AriaUI-Web") return Source::AriaUIWeb;
  if (s == "ShowUI-Desktop") return Source::ShowUIDesktop;
  return Source::Other;
}

Platform parse_platform(std::string_view s) {
  if (s == "mobile") return Platform::Mobile;
  if (s == "desktop") return Platform::Desktop;
  if (s == "web") return Platform::Web;
  throw InputError("unknown platform '" + std::string(s) + "'");
}

ElemType parse_elem_type(std::string_view s) {
  if (s == "text") return ElemType::Text;
  if (s == "icon") return ElemType::Icon;
  throw InputError("unknown element type '" + std::string(s) + "'");
}

Label parse_label(std::string_view s) {
  if (s == "positive") return Label::Positive;
  if (s == "negative") return Label::Negative;
  throw InputError("unknown label '" + std::string(s) + "'");
}

bool is_aria_ui(Source s) noexcept {
  return s == Source::AriaUIDesktop || s == Source::AriaUIMobile || s == Source::AriaUIWeb;
}

void validate(const GroundingRecord& r) {
  if (r.id.empty()) throw InputError("record with empty id");
  if (!r.dims.valid()) throw InputError("record " + r.id + ": image dimensions must be positive");
  if (!r.gt_box.valid()) throw InputError("record " + r.id + ": invalid ground-truth box");
  if (!r.dims.contains(r.gt_box)) {
    throw InputError("record " + r.id + ": ground-truth box exceeds image dimensions");
  }
}

void validate_dataset(std::span<const GroundingRecord> records) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(records.size());
  for (const auto& r : records) {
    validate(r);
    if (!seen.insert(r.id).second) throw InputError("duplicate record id " + r.id);
  }
}

void sort_by_id(std::vector<GroundingRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const GroundingRecord& a, const GroundingRecord& b) { return a.id < b.id; });
}

}  // namespace curate
