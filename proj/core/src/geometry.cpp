#include "curate/geometry.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "curate/errors.hpp"

namespace curate {

bool Point::valid() const noexcept {
  return std::isfinite(x) && std::isfinite(y) && x >= 0.0 && y >= 0.0;
}

bool BBox::valid() const noexcept {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
         x1 >= 0.0 && y1 >= 0.0 && x1 < x2 && y1 < y2;
}

std::optional<BBox> BBox::from_corners(double ax, double ay, double bx, double by) noexcept {
  BBox box{std::min(ax, bx), std::min(ay, by), std::max(ax, bx), std::max(ay, by)};
  if (!box.valid()) return std::nullopt;
  return box;
}

bool ImageDims::contains(const BBox& box) const noexcept {
  return box.valid() && box.x2 <= static_cast<double>(width) && box.y2 <= static_cast<double>(height);
}

bool point_in_box(const Point& p, const BBox& box) noexcept {
  return box.x1 <= p.x && p.x <= box.x2 && box.y1 <= p.y && p.y <= box.y2;
}

bool center_hit(const BBox& pred, const BBox& gt) noexcept {
  return point_in_box(pred.center(), gt);
}

namespace {

bool is_space(char c) noexcept {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_digit(char c) noexcept {
  return c >= '0' && c <= '9';
}

void skip_spaces(std::string_view s, std::size_t& i) noexcept {
  while (i < s.size() && is_space(s[i])) ++i;
}

// number := [+-]? (digits ('.' digits?)? | '.' digits)
std::optional<double> read_number(std::string_view s, std::size_t& i) noexcept {
  const std::size_t start = i;
  std::size_t j = i;
  bool negative = false;
  if (j < s.size() && (s[j] == '+' || s[j] == '-')) {
    negative = s[j] == '-';
    ++j;
  }
  const std::size_t body = j;
  std::size_t int_digits = 0;
  while (j < s.size() && is_digit(s[j])) {
    ++j;
    ++int_digits;
  }
  std::size_t frac_digits = 0;
  if (j < s.size() && s[j] == '.') {
    ++j;
    while (j < s.size() && is_digit(s[j])) {
      ++j;
      ++frac_digits;
    }
  }
  if (int_digits == 0 && frac_digits == 0) {
    i = start;
    return std::nullopt;
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data() + body, s.data() + j, value, std::chars_format::fixed);
  if (ec != std::errc() || ptr != s.data() + j || !std::isfinite(value)) {
    i = start;
    return std::nullopt;
  }
  i = j;
  return negative ? -value : value;
}

// Tries to read "[n, n, n, n]" starting at the '[' located at `open`.
std::optional<std::array<double, 4>> read_tuple(std::string_view s, std::size_t open) noexcept {
  std::array<double, 4> v{};
  std::size_t i = open + 1;
  for (std::size_t k = 0; k < 4; ++k) {
    skip_spaces(s, i);
    auto num = read_number(s, i);
    if (!num) return std::nullopt;
    v[k] = *num;
    skip_spaces(s, i);
    if (i >= s.size()) return std::nullopt;
    const char expected = (k == 3) ? ']' : ',';
    if (s[i] != expected) return std::nullopt;
    ++i;
  }
  return v;
}

std::optional<std::array<double, 4>> first_tuple(std::string_view s) noexcept {
  for (std::size_t pos = s.find('['); pos != std::string_view::npos; pos = s.find('[', pos + 1)) {
    if (auto t = read_tuple(s, pos)) return t;
  }
  return std::nullopt;
}

std::optional<BBox> to_box(const std::optional<std::array<double, 4>>& t) noexcept {
  if (!t) return std::nullopt;
  const auto& v = *t;
  return BBox::from_corners(v[0], v[1], v[2], v[3]);
}

}  // namespace

std::optional<std::string_view> answer_span(std::string_view text) noexcept {
  constexpr std::string_view kOpen = "<answer>";
  constexpr std::string_view kClose = "</answer>";
  const auto open = text.find(kOpen);
  if (open == std::string_view::npos) return std::nullopt;
  const auto inner = open + kOpen.size();
  const auto close = text.find(kClose, inner);
  if (close == std::string_view::npos) return std::nullopt;
  return text.substr(inner, close - inner);
}

std::optional<std::array<double, 4>> parse_exact_tuple(std::string_view text) noexcept {
  std::size_t i = 0;
  skip_spaces(text, i);
  if (i >= text.size() || text[i] != '[') return std::nullopt;
  auto t = read_tuple(text, i);
  if (!t) return std::nullopt;
  i = text.find(']', i) + 1;
  skip_spaces(text, i);
  if (i != text.size()) return std::nullopt;
  return t;
}

std::optional<BBox> first_bracketed_box(std::string_view text) noexcept {
  return to_box(first_tuple(text));
}

std::optional<BBox> parse_bbox(std::string_view text) noexcept {
  if (auto span = answer_span(text)) {
    if (auto t = first_tuple(*span)) return to_box(t);
  }
  return to_box(first_tuple(text));
}

BBox rescale_bbox(const BBox& box, const ImageDims& from, const ImageDims& to) {
  if (!from.valid() || !to.valid()) {
    throw InputError("rescale_bbox: image dimensions must be positive");
  }
  const double sx = static_cast<double>(to.width) / static_cast<double>(from.width);
  const double sy = static_cast<double>(to.height) / static_cast<double>(from.height);
  return BBox{box.x1 * sx, box.y1 * sy, box.x2 * sx, box.y2 * sy};
}

namespace {

// Python-style round-half-to-even onto the grid, matching the reference processor.
std::int64_t round_to_grid(double v, std::int64_t patch) {
  return static_cast<std::int64_t>(std::nearbyint(v / static_cast<double>(patch))) * patch;
}

std::int64_t floor_to_grid(double v, std::int64_t patch) {
  return static_cast<std::int64_t>(std::floor(v / static_cast<double>(patch))) * patch;
}

std::int64_t ceil_to_grid(double v, std::int64_t patch) {
  return static_cast<std::int64_t>(std::ceil(v / static_cast<double>(patch))) * patch;
}

std::int64_t clamp_side(std::int64_t side, std::int64_t patch, bool& clamped) {
  if (side < patch) {
    clamped = true;
    return patch;
  }
  return side;
}

}  // namespace

ResizeResult smart_resize(const ImageDims& dims, const ResizeBounds& bounds) {
  if (!dims.valid()) throw InputError("smart_resize: image dimensions must be positive");
  if (bounds.patch < 1) throw InputError("smart_resize: patch must be >= 1");
  if (bounds.min_pixels > bounds.max_pixels) {
    throw InputError("smart_resize: min_pixels exceeds max_pixels");
  }
  const std::int64_t p = bounds.patch;
  const double w = static_cast<double>(dims.width);
  const double h = static_cast<double>(dims.height);

  ResizeResult out;
  std::int64_t rw = clamp_side(round_to_grid(w, p), p, out.clamped);
  std::int64_t rh = clamp_side(round_to_grid(h, p), p, out.clamped);

  if (rw * rh > bounds.max_pixels) {
    const double beta = std::sqrt((w * h) / static_cast<double>(bounds.max_pixels));
    rw = clamp_side(floor_to_grid(w / beta, p), p, out.clamped);
    rh = clamp_side(floor_to_grid(h / beta, p), p, out.clamped);
  } else if (rw * rh < bounds.min_pixels) {
    const double beta = std::sqrt(static_cast<double>(bounds.min_pixels) / (w * h));
    rw = clamp_side(ceil_to_grid(w * beta, p), p, out.clamped);
    rh = clamp_side(ceil_to_grid(h * beta, p), p, out.clamped);
  }

  // Extreme aspect ratios can leave the area outside the budget after clamping or
  // grid rounding; trade aspect ratio for the budget by moving one side along the grid.
  for (int pass = 0; pass < 2; ++pass) {
    if (rw * rh > bounds.max_pixels) {
      std::int64_t& longer = rw >= rh ? rw : rh;
      const std::int64_t other = rw >= rh ? rh : rw;
      longer = std::max(p, (bounds.max_pixels / (other * p)) * p);
      out.clamped = true;
    } else if (rw * rh < bounds.min_pixels) {
      std::int64_t& shorter = rw <= rh ? rw : rh;
      const std::int64_t other = rw <= rh ? rh : rw;
      shorter = std::max(p, ceil_to_grid(static_cast<double>(bounds.min_pixels) / static_cast<double>(other), p));
      out.clamped = true;
    }
  }
  out.dims = ImageDims{rw, rh};
  return out;
}

}  // namespace curate
