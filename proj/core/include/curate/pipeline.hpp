#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "curate/config.hpp"
#include "curate/model_client.hpp"
#include "curate/record.hpp"
#include "curate/schema.hpp"

namespace curate {

// Keeps round(fraction * n) records (at least one when n > 0), chosen by a
// seeded shuffle, returned in id order.
std::vector<GroundingRecord> downsample(std::vector<GroundingRecord> records, double fraction, std::uint64_t seed);

struct StageReport {
  std::string name;
  std::size_t input_count = 0;
  std::size_t output_count = 0;
  std::string config_digest;
  std::string content_digest;
  std::string started;
  std::string finished;
  std::size_t deferred = 0;
  std::size_t errors = 0;
  std::uint64_t model_requests = 0;
  bool reused = false;
};

OrderedJson stage_report_to_json(const StageReport& s);
StageReport stage_report_from_json(const Json& j);

struct PipelineManifest {
  std::uint64_t seed = 0;
  std::string config_digest;
  std::vector<StageReport> stages;
  std::size_t ranker_triplets = 0;
  std::size_t pending_review = 0;
  bool complete = false;

  const StageReport* find(std::string_view name) const noexcept;
  std::uint64_t total_requests() const noexcept;
  OrderedJson to_json() const;
  static PipelineManifest from_json(const Json& j);
};

// Builds the client for a stage ("difficulty", "alignment", "embedding",
// "ambiguity", "traces").
using ClientFactory = std::function<std::unique_ptr<ModelClient>(const std::string& stage, const ClientConfig&)>;

// Mock clients when config.mock is set, otherwise HTTP clients.
ClientFactory default_client_factory(const PipelineConfig& config);

// Digest of an id-keyed row set, as recorded in the manifest.
std::string records_digest(const std::vector<GroundingRecord>& records);

struct PipelineRun {
  PipelineManifest manifest;
  std::vector<GroundingRecord> survivors;
};

// Runs load -> filters (config.stage_order) -> traces -> review queue, writing
// every stage under config.output_dir/stages and a manifest at
// config.output_dir/manifest.json. A stage whose config digest, upstream digest
// and output content all match the previous manifest is reused without model
// calls. Any error aborts the run after writing the manifest of completed stages.
PipelineRun run_pipeline(const PipelineConfig& config, ClientFactory factory = {});

}  // namespace curate
