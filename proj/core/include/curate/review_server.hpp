#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "curate/record.hpp"
#include "curate/review.hpp"
#include "curate/schema.hpp"

namespace curate {

// Review state over the pipeline survivors plus the append-only decision log.
// Safe to call from concurrent request handlers.
class ReviewService {
 public:
  ReviewService(std::vector<GroundingRecord> survivors, std::filesystem::path decisions_path,
                std::string image_root = {});
  // survivors.jsonl and decisions.jsonl under a pipeline output directory.
  static ReviewService from_output_dir(const std::filesystem::path& out_dir, std::string image_root = {});

  struct QueuePage {
    std::vector<OrderedJson> items;  // {id, instruction, image_url, bbox, width, height}
    std::optional<std::string> next_cursor;
  };
  // Undecided items with id > cursor, in id order.
  QueuePage queue(const std::string& cursor, std::size_t limit) const;

  // Body {id, verdict, note?, reviewer?}. Returns the pending count afterwards.
  // Throws ValidationError for malformed bodies, NotFoundError for unknown ids.
  std::size_t decide(const Json& body);

  struct Stats {
    std::size_t pending = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
  };
  Stats stats() const;

  struct Image {
    std::string bytes;
    std::string mime;
  };
  // Throws NotFoundError for unknown ids or unreadable files.
  Image image(const std::string& id) const;

  std::size_t size() const noexcept { return records_.size(); }

 private:
  const GroundingRecord* find(const std::string& id) const;

  std::vector<GroundingRecord> records_;  // id order
  std::string image_root_;
  std::unique_ptr<DecisionLog> log_;
  mutable std::mutex mutex_;
  std::map<std::string, ReviewDecision> effective_;
};

struct ReviewServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  std::string token;  // when set, /api/ requests need "Authorization: Bearer <token>"
  std::string static_dir;  // optional built UI mounted at /
};

// JSON API over a ReviewService:
//   GET  /api/queue?cursor=&limit=   {items:[...], next_cursor}
//   GET  /api/image/<id>             screenshot bytes
//   POST /api/decision               {pending}
//   GET  /api/stats                  {pending, accepted, rejected}
class ReviewServer {
 public:
  ReviewServer(ReviewService& service, ReviewServerOptions options = {});
  ~ReviewServer();

  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace curate
