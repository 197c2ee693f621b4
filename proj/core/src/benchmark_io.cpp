#include "curate/benchmark_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>

#include "curate/errors.hpp"
#include "curate/image.hpp"
#include "curate/schema.hpp"

namespace curate {

namespace fs = std::filesystem;

namespace {

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

Platform platform_for_source(const std::string& s) {
  if (s == "ios" || s == "android") return Platform::Mobile;
  if (s == "windows" || s == "macos") return Platform::Desktop;
  return Platform::Web;
}

std::string padded(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return buf;
}

BBox from_xywh(const Json& a) {
  if (!a.is_array() || a.size() != 4) throw InputError("box must have four numbers");
  const double x = a[0].get<double>(), y = a[1].get<double>();
  return {x, y, x + a[2].get<double>(), y + a[3].get<double>()};
}

}  // namespace

std::vector<GroundingRecord> read_screenspot(const fs::path& path, const fs::path& image_dir,
                                             std::optional<Platform> platform) {
  const Json doc = read_json_file(path);
  if (!doc.is_array()) throw InputError(path.string() + ": expected a JSON array");
  std::vector<GroundingRecord> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& e = doc[i];
    try {
      GroundingRecord r;
      r.platform = platform.value_or(platform_for_source(e.value("data_source", std::string())));
      r.id = std::string(to_string(r.platform)) + "-" + padded(i);
      const auto file = e.at("img_filename").get<std::string>();
      r.image = (image_dir.empty() ? fs::path(file) : image_dir / file).string();
      if (e.contains("img_size")) {
        r.dims = {e["img_size"][0].get<std::int64_t>(), e["img_size"][1].get<std::int64_t>()};
      } else {
        r.dims = png_dimensions(r.image);
      }
      r.instruction = e.at("instruction").get<std::string>();
      r.gt_box = from_xywh(e.at("bbox"));
      r.source = Source::Other;
      r.elem_type = parse_elem_type(e.at("data_type").get<std::string>());
      validate(r);
      out.push_back(std::move(r));
    } catch (const Json::exception& ex) {
      throw InputError(path.string() + " entry " + std::to_string(i) + ": " + ex.what());
    } catch (const InputError& ex) {
      throw InputError(path.string() + " entry " + std::to_string(i) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<GroundingRecord> read_osworld_g(const fs::path& path, std::size_t* skipped) {
  const Json doc = read_json_file(path);
  if (!doc.is_array()) throw InputError(path.string() + ": expected a JSON array");
  std::vector<GroundingRecord> out;
  std::size_t skip = 0;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& e = doc[i];
    try {
      if (e.value("box_type", std::string("bbox")) != "bbox") {
        ++skip;
        continue;
      }
      GroundingRecord r;
      r.id = e.contains("id") ? e["id"].get<std::string>() : "osworld-g-" + padded(i);
      r.image = e.at("image_path").get<std::string>();
      r.dims = {e.at("image_size")[0].get<std::int64_t>(), e.at("image_size")[1].get<std::int64_t>()};
      r.instruction = e.at("instruction").get<std::string>();
      r.gt_box = from_xywh(e.at("box_coordinates"));
      r.platform = Platform::Desktop;
      r.source = Source::Other;
      validate(r);
      out.push_back(std::move(r));
    } catch (const Json::exception& ex) {
      throw InputError(path.string() + " entry " + std::to_string(i) + ": " + ex.what());
    }
  }
  if (skipped) *skipped = skip;
  return out;
}

std::vector<GroundingRecord> read_benchmark(const fs::path& path, const fs::path& image_dir,
                                            std::optional<Platform> platform) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  char first = 0;
  while (in.get(first) && std::isspace(static_cast<unsigned char>(first))) {
  }
  if (first != '[') return read_records(path);
  const Json doc = read_json_file(path);
  if (!doc.empty() && doc[0].contains("img_filename")) return read_screenspot(path, image_dir, platform);
  return read_osworld_g(path);
}

}  // namespace curate
