#include "curate/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include "curate/errors.hpp"

namespace curate {

RgbImage::RgbImage(std::int64_t w, std::int64_t h, Rgb fill) : width(w), height(h) {
  if (w < 1 || h < 1) throw InputError("image dimensions must be positive");
  pixels.resize(static_cast<std::size_t>(w * h * 3));
  for (std::size_t i = 0; i < pixels.size(); i += 3) std::copy(fill.begin(), fill.end(), pixels.begin() + static_cast<std::ptrdiff_t>(i));
}

Rgb RgbImage::at(std::int64_t x, std::int64_t y) const {
  const auto i = static_cast<std::size_t>((y * width + x) * 3);
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void RgbImage::set(std::int64_t x, std::int64_t y, Rgb c) {
  const auto i = static_cast<std::size_t>((y * width + x) * 3);
  pixels[i] = c[0];
  pixels[i + 1] = c[1];
  pixels[i + 2] = c[2];
}

RgbImage decode_png(std::string_view bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw InputError(std::string("cannot decode PNG: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  RgbImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw InputError("cannot decode PNG: " + msg);
  }
  return out;
}

ImageDims png_dimensions(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw InputError("cannot read PNG header of " + path.string() + ": " + img.message);
  }
  ImageDims dims{img.width, img.height};
  png_image_free(&img);
  return dims;
}

RgbImage load_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read image " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string encode_png(const RgbImage& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw InputError(std::string("cannot encode PNG: ") + img.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw InputError(std::string("cannot encode PNG: ") + img.message);
  }
  out.resize(size);
  return out;
}

void save_png(const RgbImage& image, const std::filesystem::path& path) {
  const std::string bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write image " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void draw_box_outline(RgbImage& image, const BBox& box, int line_width, Rgb color) {
  if (line_width < 1) throw InputError("outline width must be >= 1");
  const auto left = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(box.x1)), 0, image.width - 1);
  const auto top = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(box.y1)), 0, image.height - 1);
  const auto right = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(box.x2)) - 1, 0, image.width - 1);
  const auto bottom = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(box.y2)) - 1, 0, image.height - 1);
  for (std::int64_t y = top; y <= bottom; ++y) {
    for (std::int64_t x = left; x <= right; ++x) {
      const bool edge = x - left < line_width || right - x < line_width || y - top < line_width ||
                        bottom - y < line_width;
      if (edge) image.set(x, y, color);
    }
  }
}

}  // namespace curate
