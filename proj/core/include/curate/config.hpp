#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "curate/diversity.hpp"
#include "curate/model_client.hpp"
#include "curate/ranker_data.hpp"
#include "curate/reward.hpp"
#include "curate/schema.hpp"
#include "curate/trace.hpp"

namespace curate {

struct DatasetSpec {
  Source source = Source::Other;
  std::filesystem::path path;
  double downsample = 1.0;  // fraction kept before filtering
  bool cluster = false;     // take part in diversity selection
};

struct TraceStageConfig {
  bool enabled = false;
  bool drop_violations = false;
  OverlayStyle style;
  TraceRules rules;
};

inline const std::vector<std::string> kFilterStages = {"difficulty", "alignment", "diversity", "ambiguity"};

// Declarative pipeline description, loaded from one JSON document. Keys:
//   seed (required), output_dir, image_root, mock, mock_behavior{...},
//   datasets[{source, path, downsample, cluster}],
//   clients{difficulty|alignment|embedding|ambiguity|traces: ClientConfig},
//   eligibility{<source>: M}, diversity{ratio, target_dim, metric, max_iterations, tolerance},
//   reward{token_limit, tokenizer}, traces{enabled, drop_violations, line_width, color, forbidden_phrases,
//   max_sentences}, stage_order[...], ranker_data
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "curate-out";
  std::string image_root;
  bool mock = false;
  MockBehavior mock_behavior;
  std::vector<DatasetSpec> datasets;
  std::map<std::string, ClientConfig> clients;
  EligibilityRule eligibility;
  DiversityOptions diversity;
  RewardConfig reward;
  TraceStageConfig traces;
  std::vector<std::string> stage_order = kFilterStages;
  bool ranker_data = true;

  // Relative paths resolve against `base_dir`. Throws InputError on schema
  // violations, a missing seed, or dataset paths that do not exist.
  static PipelineConfig from_json(const Json& j, const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path);

  // Client binding for a stage; unknown stages get a default config.
  ClientConfig client_for(const std::string& stage) const;

  // Canonical JSON for digests (every field, stable order).
  OrderedJson to_json() const;
  void validate() const;
};

OrderedJson client_config_to_json(const ClientConfig& c);
ClientConfig client_config_from_json(const Json& j);

}  // namespace curate
