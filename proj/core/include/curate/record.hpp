#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curate/geometry.hpp"

namespace curate {

enum class Source { AriaUIDesktop, AriaUIMobile, AriaUIWeb, ShowUIDesktop, Other };
enum class Platform { Mobile, Desktop, Web };
enum class ElemType { Text, Icon };

// Binary label shared by judges, ranker triplets and classification metrics.
enum class Label { Positive, Negative };

std::string_view to_string(Source s) noexcept;
std::string_view to_string(Platform p) noexcept;
std::string_view to_string(ElemType e) noexcept;
std::string_view to_string(Label l) noexcept;

// Parsers throw InputError on unknown names. Source names outside the known set map to Other.
Source parse_source(std::string_view s) noexcept;
Platform parse_platform(std::string_view s);
ElemType parse_elem_type(std::string_view s);
Label parse_label(std::string_view s);

bool is_aria_ui(Source s) noexcept;

// One (screenshot, instruction, ground-truth box) instance. `gt_box` is in the
// original image's pixel frame.
struct GroundingRecord {
  std::string id;
  std::string image;
  ImageDims dims;
  std::string instruction;
  BBox gt_box;
  Source source = Source::Other;
  Platform platform = Platform::Desktop;
  std::optional<ElemType> elem_type;

  friend bool operator==(const GroundingRecord&, const GroundingRecord&) = default;
};

// Throws InputError describing the first violated invariant.
void validate(const GroundingRecord& r);

// Throws InputError on invalid records or duplicate ids.
void validate_dataset(std::span<const GroundingRecord> records);

// Stable id ordering used for every persisted stage output.
void sort_by_id(std::vector<GroundingRecord>& records);

}  // namespace curate
