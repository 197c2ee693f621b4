#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "curate/geometry.hpp"

namespace curate {

using Rgb = std::array<std::uint8_t, 3>;

// 8-bit RGB raster, row-major.
struct RgbImage {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(std::int64_t w, std::int64_t h, Rgb fill = {0, 0, 0});

  ImageDims dims() const noexcept { return {width, height}; }
  Rgb at(std::int64_t x, std::int64_t y) const;
  void set(std::int64_t x, std::int64_t y, Rgb c);
};

// PNG only. Alpha is dropped, palettes and grey are expanded, 16-bit is stripped.
// Throws InputError when the bytes are not a decodable PNG.
RgbImage decode_png(std::string_view bytes);
RgbImage load_png(const std::filesystem::path& path);
// Header only; no pixel decode.
ImageDims png_dimensions(const std::filesystem::path& path);
std::string encode_png(const RgbImage& image);
void save_png(const RgbImage& image, const std::filesystem::path& path);

// Draws a rectangle outline `line_width` pixels thick, inward from the box edges.
// The box is snapped outward to whole pixels and clipped to the image.
void draw_box_outline(RgbImage& image, const BBox& box, int line_width, Rgb color);

}  // namespace curate
