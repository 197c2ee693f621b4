#pragma once

// JSONL interchange: one JSON object per line, UTF-8, fields in a fixed order.
//
//   GroundingRecord  {id, image, width, height, instruction, bbox:[x1,y1,x2,y2], source, platform, elem_type?}
//   RankerTriplet    {id, image, text, bbox, label, origin}
//   RewardRow in     {id, text, gt_bbox}
//   RewardRow out    {id, format, solution, length, total}
//   Decision         {id, verdict, note?, reviewer, ts}
//   Prediction cache {model, id, raw_output, bbox|null, model_width, model_height}
//   Outcome          {id, label, raw_output, bbox|null, model_width, model_height}
//   Embedding        {id, vector:[...]}
//   Trace            {id, trace, violations:[...]}

#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "curate/difficulty.hpp"
#include "curate/diversity.hpp"
#include "curate/ranker_data.hpp"
#include "curate/record.hpp"
#include "curate/reward.hpp"
#include "curate/trace.hpp"

namespace curate {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Calls `fn` for every non-blank line. Parse failures become InputError naming
// the file and line.
void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&)>& fn);

// Writes via a temporary file and rename so readers never see a partial file.
void write_jsonl(const std::filesystem::path& path, const std::vector<OrderedJson>& rows);

// Serialized form used for content digests and file output (compact, UTF-8).
std::string dump_row(const OrderedJson& row);

OrderedJson bbox_to_json(const BBox& box);
BBox bbox_from_json(const Json& j);

OrderedJson record_to_json(const GroundingRecord& r);
GroundingRecord record_from_json(const Json& j);
std::vector<GroundingRecord> read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<GroundingRecord>& records);

OrderedJson ground_result_to_json(const std::string& model, const std::string& record_id, const GroundResult& g);
GroundResult ground_result_from_json(const Json& j);

OrderedJson outcome_to_json(const DifficultyOutcome& o);
DifficultyOutcome outcome_from_json(const Json& j);

OrderedJson triplet_to_json(const RankerTriplet& t);
RankerTriplet triplet_from_json(const Json& j);

struct RewardInput {
  std::string id;
  std::string text;
  BBox gt;
};
RewardInput reward_input_from_json(const Json& j);
OrderedJson reward_output_to_json(const std::string& id, const RewardBreakdown& r);

OrderedJson embedding_to_json(const std::string& id, const std::vector<double>& values);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

OrderedJson trace_to_json(const std::string& id, const TraceResult& t);

}  // namespace curate
