#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "curate/record.hpp"

namespace curate::fixture {

struct SynthOptions {
  std::size_t max_per_image = 8;
  // Fraction of records whose box duplicates another box on the same screenshot.
  double duplicate_box_rate = 0.0;
  bool with_elem_type = true;
};

// Random but valid records: screenshots of common sizes holding 1..max_per_image
// annotations, sources and platforms cycled, ids "r000000"... in order.
std::vector<GroundingRecord> synth_records(std::size_t n, std::uint64_t seed, const SynthOptions& options = {});

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace curate::fixture
