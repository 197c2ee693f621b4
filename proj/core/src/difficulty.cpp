#include "curate/difficulty.hpp"

#include <algorithm>
#include <fstream>

#include "curate/errors.hpp"
#include "curate/parallel.hpp"
#include "curate/schema.hpp"

namespace curate {

std::string_view to_string(Difficulty d) noexcept {
  return d == Difficulty::Easy ? "easy" : "hard";
}

Difficulty parse_difficulty(std::string_view s) {
  if (s == "easy") return Difficulty::Easy;
  if (s == "hard") return Difficulty::Hard;
  throw InputError("unknown difficulty '" + std::string(s) + "'");
}

Difficulty classify(const GroundResult& prediction, const BBox& gt) noexcept {
  return prediction.parsed_box && center_hit(*prediction.parsed_box, gt) ? Difficulty::Easy : Difficulty::Hard;
}

PredictionCache::PredictionCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  for_each_jsonl(*path_, [&](const nlohmann::json& row) {
    entries_[{row.at("model").get<std::string>(), row.at("id").get<std::string>()}] = ground_result_from_json(row);
  });
}

std::optional<GroundResult> PredictionCache::get(const std::string& model, const std::string& record_id) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find({model, record_id});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void PredictionCache::put(const std::string& model, const std::string& record_id, GroundResult result) {
  std::lock_guard lock(mutex_);
  Key key{model, record_id};
  auto [it, inserted] = entries_.insert_or_assign(key, std::move(result));
  (void)it;
  if (inserted) unflushed_.push_back(std::move(key));
}

std::size_t PredictionCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void PredictionCache::flush() {
  std::lock_guard lock(mutex_);
  if (!path_ || unflushed_.empty()) {
    unflushed_.clear();
    return;
  }
  std::sort(unflushed_.begin(), unflushed_.end());
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
  std::ofstream out(*path_, std::ios::app);
  if (!out) throw InputError("cannot append to prediction cache " + path_->string());
  for (const auto& key : unflushed_) {
    out << ground_result_to_json(key.first, key.second, entries_.at(key)).dump() << '\n';
  }
  unflushed_.clear();
}

DifficultyPartition partition_by_difficulty(std::span<const GroundingRecord> records, ModelClient& client,
                                            PredictionCache& cache) {
  validate_dataset(records);
  std::vector<const GroundingRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->id < b->id; });

  const std::string& model = client.config().model;
  const std::uint64_t before = client.requests_issued();
  auto results = parallel_map(ordered.size(), client.config().max_in_flight, [&](std::size_t i) {
    const GroundingRecord& r = *ordered[i];
    if (auto hit = cache.get(model, r.id)) return *hit;
    GroundResult g = client.ground(r);
    cache.put(model, r.id, g);
    return g;
  });

  DifficultyPartition out;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const GroundingRecord& r = *ordered[i];
    if (!results[i].ok()) {
      try {
        std::rethrow_exception(results[i].error);
      } catch (const RequestError& e) {
        out.deferred.push_back({r.id, e.what(), e.attempts()});
        continue;
      }
    }
    DifficultyOutcome outcome{r.id, std::move(*results[i].value), Difficulty::Hard};
    outcome.label = classify(outcome.prediction, r.gt_box);
    (outcome.label == Difficulty::Easy ? out.easy : out.hard).push_back(r);
    out.outcomes.push_back(std::move(outcome));
  }
  cache.flush();
  out.requests = client.requests_issued() - before;
  return out;
}

}  // namespace curate
