#include "curate/ranker_data.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "curate/digest.hpp"
#include "curate/errors.hpp"
#include "curate/random.hpp"

namespace curate {

std::string_view to_string(TripletOrigin o) noexcept {
  switch (o) {
    case TripletOrigin::KeptOriginal: return "kept-original";
    case TripletOrigin::Swapped: return "swapped";
    case TripletOrigin::BenchmarkPos: return "benchmark-pos";
    case TripletOrigin::BenchmarkNeg: break;
  }
  return "benchmark-neg";
}

TripletOrigin parse_origin(std::string_view s) {
  if (s == "kept-original") return TripletOrigin::KeptOriginal;
  if (s == "swapped") return TripletOrigin::Swapped;
  if (s == "benchmark-pos") return TripletOrigin::BenchmarkPos;
  if (s == "benchmark-neg") return TripletOrigin::BenchmarkNeg;
  throw InputError("unknown triplet origin '" + std::string(s) + "'");
}

EligibilityRule::EligibilityRule() {
  thresholds_[Source::AriaUIDesktop] = 5;
  thresholds_[Source::AriaUIMobile] = 5;
  thresholds_[Source::AriaUIWeb] = 5;
  thresholds_[Source::ShowUIDesktop] = 1;
  thresholds_[Source::Other] = 1;
}

std::size_t EligibilityRule::threshold(Source s) const {
  return thresholds_.at(s);
}

void EligibilityRule::set_threshold(Source s, std::size_t m) {
  if (m < 1) throw InputError("eligibility threshold must be >= 1");
  thresholds_[s] = m;
}

std::vector<std::vector<GroundingRecord>> group_by_image(std::span<const GroundingRecord> records) {
  std::map<std::string, std::vector<GroundingRecord>> by_image;
  for (const auto& r : records) by_image[r.image].push_back(r);
  std::vector<std::vector<GroundingRecord>> groups;
  groups.reserve(by_image.size());
  for (auto& [image, members] : by_image) {
    sort_by_id(members);
    groups.push_back(std::move(members));
  }
  return groups;
}

namespace {

RankerTriplet make_triplet(std::string id, const GroundingRecord& text_from, const BBox& box, Label label,
                           TripletOrigin origin) {
  return RankerTriplet{std::move(id), text_from.image, text_from.dims, text_from.instruction, box, label, origin};
}

}  // namespace

std::vector<RankerTriplet> build_training_triplets(std::span<const GroundingRecord> easy,
                                                   std::span<const DifficultyOutcome> outcomes,
                                                   const EligibilityRule& rule, std::uint64_t seed,
                                                   const TripletBuildOptions& options) {
  std::unordered_map<std::string_view, Difficulty> label_of;
  for (const auto& o : outcomes) label_of.emplace(o.record_id, o.label);

  std::unordered_map<std::string, std::size_t> correct_per_image;
  for (const auto& r : easy) {
    auto it = label_of.find(r.id);
    if (it == label_of.end()) throw InputError("no difficulty outcome for easy record " + r.id);
    if (it->second == Difficulty::Easy) ++correct_per_image[r.image];
  }

  std::vector<RankerTriplet> out;
  for (const auto& group : group_by_image(easy)) {
    const GroundingRecord& first = group.front();
    std::size_t m = 1;
    for (const auto& r : group) {
      if (r.dims != first.dims) {
        throw InputError("records " + first.id + " and " + r.id + " share image " + first.image +
                         " but disagree on its dimensions");
      }
      m = std::max(m, rule.threshold(r.source));
    }
    if (correct_per_image[first.image] < m) continue;

    if (group.size() == 1) {
      out.push_back(make_triplet(first.id, first, first.gt_box, Label::Positive, TripletOrigin::KeptOriginal));
      continue;
    }
    Rng rng(mix_seed(seed, "triplets\x1f" + first.image));
    for (std::size_t i = 0; i < group.size(); ++i) {
      const GroundingRecord& r = group[i];
      const bool keep = bernoulli(rng, options.positive_probability);
      std::vector<std::size_t> donors;
      for (std::size_t j = 0; j < group.size(); ++j) {
        if (j != i && group[j].gt_box != r.gt_box) donors.push_back(j);
      }
      if (keep || donors.empty()) {
        out.push_back(make_triplet(r.id, r, r.gt_box, Label::Positive, TripletOrigin::KeptOriginal));
      } else {
        const GroundingRecord& donor = group[donors[uniform_index(rng, donors.size())]];
        out.push_back(make_triplet(r.id, r, donor.gt_box, Label::Negative, TripletOrigin::Swapped));
      }
    }
  }
  return out;
}

std::size_t BenchmarkExpansion::negatives() const noexcept {
  return static_cast<std::size_t>(std::count_if(triplets.begin(), triplets.end(),
                                                [](const RankerTriplet& t) { return t.label == Label::Negative; }));
}

double BenchmarkExpansion::negative_fraction() const noexcept {
  return triplets.empty() ? 0.0 : static_cast<double>(negatives()) / static_cast<double>(triplets.size());
}

BenchmarkExpansion expand_benchmark_binary(const std::vector<std::vector<GroundingRecord>>& groups) {
  BenchmarkExpansion out;
  for (const auto& raw_group : groups) {
    std::vector<const GroundingRecord*> group;
    std::set<std::tuple<std::string, double, double, double, double>> seen;
    for (const auto& r : raw_group) {
      if (!seen.emplace(r.instruction, r.gt_box.x1, r.gt_box.y1, r.gt_box.x2, r.gt_box.y2).second) {
        out.duplicates.push_back(r.id);
        continue;
      }
      group.push_back(&r);
    }
    for (const auto* r : group) {
      out.triplets.push_back(make_triplet(r->id + "#pos", *r, r->gt_box, Label::Positive, TripletOrigin::BenchmarkPos));
    }
    for (const auto* r : group) {
      for (const auto* other : group) {
        if (other == r) continue;
        out.triplets.push_back(
            make_triplet(r->id + "#neg#" + other->id, *r, other->gt_box, Label::Negative, TripletOrigin::BenchmarkNeg));
      }
    }
  }
  return out;
}

}  // namespace curate
