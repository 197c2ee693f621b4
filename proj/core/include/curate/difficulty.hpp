#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curate/model_client.hpp"
#include "curate/record.hpp"

namespace curate {

enum class Difficulty { Easy, Hard };
std::string_view to_string(Difficulty d) noexcept;
Difficulty parse_difficulty(std::string_view s);

// A record is easy iff the base model's prediction parses and its center hits gt.
struct DifficultyOutcome {
  std::string record_id;
  GroundResult prediction;
  Difficulty label = Difficulty::Hard;

  friend bool operator==(const DifficultyOutcome&, const DifficultyOutcome&) = default;
};

Difficulty classify(const GroundResult& prediction, const BBox& gt) noexcept;

// Grounding predictions keyed by (model id, record id), optionally backed by a
// JSONL file. Thread-safe.
class PredictionCache {
 public:
  PredictionCache() = default;
  // Loads existing rows from `path` if it exists; later flush() calls append there.
  explicit PredictionCache(std::filesystem::path path);

  std::optional<GroundResult> get(const std::string& model, const std::string& record_id) const;
  void put(const std::string& model, const std::string& record_id, GroundResult result);
  std::size_t size() const;

  // Appends rows added since the last flush, sorted by (model, id).
  void flush();

 private:
  using Key = std::pair<std::string, std::string>;
  mutable std::mutex mutex_;
  std::optional<std::filesystem::path> path_;
  std::map<Key, GroundResult> entries_;
  std::vector<Key> unflushed_;
};

struct DeferredRecord {
  std::string record_id;
  std::string reason;
  std::size_t attempts = 0;
};

struct DifficultyPartition {
  std::vector<GroundingRecord> easy;
  std::vector<GroundingRecord> hard;
  std::vector<DifficultyOutcome> outcomes;  // id-ordered, deferred records excluded
  std::vector<DeferredRecord> deferred;
  std::uint64_t requests = 0;
};

// Grounds every record (reusing cached predictions), then splits into easy and
// hard. Records whose request fails after retries are deferred, not classified.
// All outputs are ordered by record id regardless of completion order.
DifficultyPartition partition_by_difficulty(std::span<const GroundingRecord> records, ModelClient& client,
                                            PredictionCache& cache);

}  // namespace curate
