#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace curate {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool valid() const noexcept;
  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box in absolute pixels of some image frame. Valid boxes satisfy
// x1 < x2, y1 < y2, with every coordinate finite and non-negative.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  bool valid() const noexcept;
  Point center() const noexcept { return {(x1 + x2) / 2.0, (y1 + y2) / 2.0}; }
  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }

  // Builds a box from two corners in any order; absent when the result is not valid.
  static std::optional<BBox> from_corners(double ax, double ay, double bx, double by) noexcept;

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct ImageDims {
  std::int64_t width = 0;
  std::int64_t height = 0;

  bool valid() const noexcept { return width >= 1 && height >= 1; }
  std::int64_t area() const noexcept { return width * height; }
  bool contains(const BBox& box) const noexcept;

  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

// Boundary-inclusive containment.
bool point_in_box(const Point& p, const BBox& box) noexcept;

// True iff the center of `pred` lies inside `gt` (boundary inclusive).
bool center_hit(const BBox& pred, const BBox& gt) noexcept;

// Scans `text` for a bracketed numeric 4-tuple "[a, b, c, d]". A tuple inside the
// first <answer>...</answer> span wins; otherwise the first tuple anywhere. Corners
// are normalized so x1 < x2 and y1 < y2. Never throws.
std::optional<BBox> parse_bbox(std::string_view text) noexcept;

// Like parse_bbox, but restricted to `text` with no answer-span preference.
std::optional<BBox> first_bracketed_box(std::string_view text) noexcept;

// Accepts exactly one "[a, b, c, d]" with optional surrounding whitespace and
// nothing else; numbers are integers or decimals.
std::optional<std::array<double, 4>> parse_exact_tuple(std::string_view text) noexcept;

// Locates the first complete <answer>...</answer> span and returns its inner text.
std::optional<std::string_view> answer_span(std::string_view text) noexcept;

// Per-axis scaling between image frames. Throws InputError on degenerate dims.
BBox rescale_bbox(const BBox& box, const ImageDims& from, const ImageDims& to);

struct ResizeBounds {
  std::int64_t patch = 28;
  std::int64_t min_pixels = 3136;
  std::int64_t max_pixels = 846720;
};

struct ResizeResult {
  ImageDims dims;
  // Set when a dimension had to be clamped to one patch (rounding reached zero)
  // or when the area bound could only be met by giving up aspect ratio.
  bool clamped = false;
};

// Aspect-preserving resize onto the patch grid with a pixel-area budget.
//   1. round each side to the nearest patch multiple;
//   2. if the area exceeds max_pixels, divide both sides by sqrt(area / max_pixels)
//      and floor to the grid; if below min_pixels, multiply by sqrt(min_pixels / area)
//      and ceil to the grid (area is the original w*h).
// Sides that collapse to zero are clamped to one patch; when clamping pushes the
// area out of range the longer (resp. shorter) side is adjusted along the grid.
// Throws InputError for patch < 1, min > max or invalid dims.
ResizeResult smart_resize(const ImageDims& dims, const ResizeBounds& bounds = {});

}  // namespace curate
