#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curate/schema.hpp"

namespace curate {

enum class Verdict { Accept, Reject };
std::string_view to_string(Verdict v) noexcept;
// Throws ValidationError for anything but "accept" / "reject".
Verdict parse_verdict(std::string_view s);

struct ReviewDecision {
  std::string id;
  Verdict verdict = Verdict::Accept;
  std::optional<std::string> note;
  std::string reviewer;
  std::string ts;  // ISO-8601 UTC, millisecond precision; compares lexicographically

  friend bool operator==(const ReviewDecision&, const ReviewDecision&) = default;
};

OrderedJson decision_to_json(const ReviewDecision& d);
ReviewDecision decision_from_json(const Json& j);

std::string utc_timestamp_now();

// Append-only JSONL decision history. Appends are serialized and flushed per line.
class DecisionLog {
 public:
  explicit DecisionLog(std::filesystem::path path);

  std::vector<ReviewDecision> load() const;
  void append(const ReviewDecision& d);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
};

// Last write wins: the latest timestamp, and on equal timestamps the later entry.
std::map<std::string, ReviewDecision> effective_decisions(std::span<const ReviewDecision> history);

}  // namespace curate
