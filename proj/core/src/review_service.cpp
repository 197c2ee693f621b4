#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "curate/errors.hpp"
#include "curate/model_client.hpp"
#include "curate/review.hpp"
#include "curate/review_server.hpp"

namespace curate {

namespace fs = std::filesystem;

std::string_view to_string(Verdict v) noexcept { return v == Verdict::Accept ? "accept" : "reject"; }

Verdict parse_verdict(std::string_view s) {
  if (s == "accept") return Verdict::Accept;
  if (s == "reject") return Verdict::Reject;
  throw ValidationError("verdict must be \"accept\" or \"reject\"");
}

OrderedJson decision_to_json(const ReviewDecision& d) {
  OrderedJson j;
  j["id"] = d.id;
  j["verdict"] = to_string(d.verdict);
  if (d.note) j["note"] = *d.note;
  j["reviewer"] = d.reviewer;
  j["ts"] = d.ts;
  return j;
}

ReviewDecision decision_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("decision must be a JSON object");
  auto str = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
    return j.at(key).get<std::string>();
  };
  ReviewDecision d;
  auto id = str("id");
  if (!id || id->empty()) throw ValidationError("field 'id' is required");
  d.id = *id;
  auto verdict = str("verdict");
  if (!verdict) throw ValidationError("field 'verdict' is required");
  d.verdict = parse_verdict(*verdict);
  d.note = str("note");
  d.reviewer = str("reviewer").value_or("anonymous");
  d.ts = str("ts").value_or("");
  return d;
}

std::string utc_timestamp_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
  return ss.str();
}

DecisionLog::DecisionLog(fs::path path) : path_(std::move(path)) {}

std::vector<ReviewDecision> DecisionLog::load() const {
  std::lock_guard lock(mutex_);
  std::vector<ReviewDecision> out;
  if (!fs::exists(path_)) return out;
  for_each_jsonl(path_, [&](const Json& row) {
    try {
      out.push_back(decision_from_json(row));
    } catch (const ValidationError& e) {
      throw InputError(path_.string() + ": " + e.what());
    }
  });
  return out;
}

void DecisionLog::append(const ReviewDecision& d) {
  std::lock_guard lock(mutex_);
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw InputError("cannot append to " + path_.string());
  out << dump_row(decision_to_json(d)) << '\n';
  out.flush();
  if (!out) throw InputError("write failed for " + path_.string());
}

std::map<std::string, ReviewDecision> effective_decisions(std::span<const ReviewDecision> history) {
  std::map<std::string, ReviewDecision> out;
  for (const auto& d : history) {
    auto it = out.find(d.id);
    if (it == out.end()) {
      out.emplace(d.id, d);
    } else if (d.ts >= it->second.ts) {
      it->second = d;
    }
  }
  return out;
}

ReviewService::ReviewService(std::vector<GroundingRecord> survivors, fs::path decisions_path, std::string image_root)
    : records_(std::move(survivors)),
      image_root_(std::move(image_root)),
      log_(std::make_unique<DecisionLog>(std::move(decisions_path))) {
  sort_by_id(records_);
  auto history = log_->load();
  effective_ = effective_decisions(history);
}

ReviewService ReviewService::from_output_dir(const fs::path& out_dir, std::string image_root) {
  const fs::path survivors = out_dir / "survivors.jsonl";
  if (!fs::exists(survivors)) throw InputError("no survivors.jsonl under " + out_dir.string());
  return ReviewService(read_records(survivors), out_dir / "decisions.jsonl", std::move(image_root));
}

const GroundingRecord* ReviewService::find(const std::string& id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), id,
                             [](const GroundingRecord& r, const std::string& key) { return r.id < key; });
  return it != records_.end() && it->id == id ? &*it : nullptr;
}

ReviewService::QueuePage ReviewService::queue(const std::string& cursor, std::size_t limit) const {
  limit = std::clamp<std::size_t>(limit, 1, 500);
  std::lock_guard lock(mutex_);
  QueuePage page;
  auto it = std::upper_bound(records_.begin(), records_.end(), cursor,
                             [](const std::string& key, const GroundingRecord& r) { return key < r.id; });
  for (; it != records_.end(); ++it) {
    if (effective_.contains(it->id)) continue;
    if (page.items.size() == limit) {
      page.next_cursor = page.items.back()["id"].get<std::string>();
      break;
    }
    OrderedJson item;
    item["id"] = it->id;
    item["instruction"] = it->instruction;
    item["image_url"] = "/api/image/" + it->id;
    item["bbox"] = bbox_to_json(it->gt_box);
    item["width"] = it->dims.width;
    item["height"] = it->dims.height;
    page.items.push_back(std::move(item));
  }
  return page;
}

std::size_t ReviewService::decide(const Json& body) {
  ReviewDecision d = decision_from_json(body);
  if (!find(d.id)) throw NotFoundError("unknown item id: " + d.id);
  std::lock_guard lock(mutex_);
  d.ts = utc_timestamp_now();
  // Keep timestamps monotone per id so a same-millisecond resubmission still wins.
  if (auto it = effective_.find(d.id); it != effective_.end() && d.ts < it->second.ts) d.ts = it->second.ts;
  log_->append(d);
  effective_[d.id] = d;
  std::size_t decided = 0;
  for (const auto& [id, dec] : effective_) decided += find(id) ? 1 : 0;
  return records_.size() - decided;
}

ReviewService::Stats ReviewService::stats() const {
  std::lock_guard lock(mutex_);
  Stats s;
  for (const auto& r : records_) {
    auto it = effective_.find(r.id);
    if (it == effective_.end()) {
      ++s.pending;
    } else if (it->second.verdict == Verdict::Accept) {
      ++s.accepted;
    } else {
      ++s.rejected;
    }
  }
  return s;
}

ReviewService::Image ReviewService::image(const std::string& id) const {
  const GroundingRecord* r = find(id);
  if (!r) throw NotFoundError("unknown item id: " + id);
  fs::path p(r->image);
  if (p.is_relative() && !image_root_.empty()) p = fs::path(image_root_) / p;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw NotFoundError("screenshot not readable: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return {ss.str(), mime_for_path(p.string())};
}

}  // namespace curate
