#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "curate/difficulty.hpp"
#include "curate/record.hpp"

namespace curate {

enum class TripletOrigin { KeptOriginal, Swapped, BenchmarkPos, BenchmarkNeg };
std::string_view to_string(TripletOrigin o) noexcept;
TripletOrigin parse_origin(std::string_view s);

// (image, text, box, label) instance for training or evaluating the alignment ranker.
struct RankerTriplet {
  std::string id;
  std::string image;
  ImageDims dims;
  std::string text;
  BBox box;
  Label label = Label::Positive;
  TripletOrigin origin = TripletOrigin::KeptOriginal;

  friend bool operator==(const RankerTriplet&, const RankerTriplet&) = default;
};

// Minimum number of correct base-model predictions an image needs before its
// annotations are used for ranker training.
class EligibilityRule {
 public:
  // AriaUI sources need 5, ShowUI-Desktop (and anything else) needs 1.
  EligibilityRule();

  std::size_t threshold(Source s) const;
  // Throws InputError when m < 1.
  void set_threshold(Source s, std::size_t m);

 private:
  std::map<Source, std::size_t> thresholds_;
};

struct TripletBuildOptions {
  double positive_probability = 0.5;
};

// Groups easy records by screenshot. A group is used only if its number of easy
// outcomes reaches the source's threshold. Within a used group each annotation is
// kept with its own box (positive) with probability 0.5, else it becomes a
// negative carrying the box of a uniformly chosen other annotation of the same
// screenshot whose box differs. Single-annotation groups are always positive.
// Output is ordered by (image, record id); each group draws from its own seeded
// stream so the result does not depend on group processing order.
std::vector<RankerTriplet> build_training_triplets(std::span<const GroundingRecord> easy,
                                                   std::span<const DifficultyOutcome> outcomes,
                                                   const EligibilityRule& rule, std::uint64_t seed,
                                                   const TripletBuildOptions& options = {});

struct BenchmarkExpansion {
  std::vector<RankerTriplet> triplets;
  // Ids of annotations dropped because an earlier annotation in the same group had
  // the same (instruction, box).
  std::vector<std::string> duplicates;

  std::size_t negatives() const noexcept;
  double negative_fraction() const noexcept;
};

// For a group of n annotations emits n positives and, for each annotation i, the
// n-1 negatives pairing instruction i with every other annotation's box.
BenchmarkExpansion expand_benchmark_binary(const std::vector<std::vector<GroundingRecord>>& groups);

// Groups records by image path, both groups and members ordered by id.
std::vector<std::vector<GroundingRecord>> group_by_image(std::span<const GroundingRecord> records);

}  // namespace curate
