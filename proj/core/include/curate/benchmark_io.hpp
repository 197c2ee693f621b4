#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "curate/record.hpp"

namespace curate {

// ScreenSpot-style annotation file: a JSON array of
//   {img_filename, bbox:[x, y, w, h], instruction, data_type: text|icon, data_source, img_size?:[w, h]}
// Screenshot sizes come from img_size or, failing that, the PNG header under
// `image_dir`. The platform is `platform` if given, else inferred from data_source
// (ios/android -> mobile, windows/macos -> desktop, everything else -> web).
// Ids are "<platform>-<index>" with a zero-padded index in file order.
std::vector<GroundingRecord> read_screenspot(const std::filesystem::path& path, const std::filesystem::path& image_dir,
                                             std::optional<Platform> platform = std::nullopt);

// OSWorld-G-style annotation file: a JSON array of
//   {id, image_path, image_size:[w, h], instruction, box_type, box_coordinates:[x, y, w, h]}
// Only box_type "bbox" entries are kept; the rest are counted in `skipped`.
std::vector<GroundingRecord> read_osworld_g(const std::filesystem::path& path, std::size_t* skipped = nullptr);

// Dispatches on content: a JSONL file of GroundingRecord rows, or one of the
// two array formats above.
std::vector<GroundingRecord> read_benchmark(const std::filesystem::path& path, const std::filesystem::path& image_dir,
                                            std::optional<Platform> platform = std::nullopt);

}  // namespace curate
