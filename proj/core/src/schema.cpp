#include "curate/schema.hpp"

#include <cmath>
#include <fstream>

#include "curate/errors.hpp"

namespace curate {

namespace {

OrderedJson number(double v) {
  if (std::nearbyint(v) == v && std::fabs(v) < 9e15) return static_cast<std::int64_t>(v);
  return v;
}

}  // namespace

void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json row;
    try {
      row = Json::parse(line);
    } catch (const Json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      fn(row);
    } catch (const Json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string dump_row(const OrderedJson& row) {
  return row.dump(-1, ' ', false, OrderedJson::error_handler_t::replace);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<OrderedJson>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    for (const auto& row : rows) out << dump_row(row) << '\n';
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

OrderedJson bbox_to_json(const BBox& box) {
  return OrderedJson::array({number(box.x1), number(box.y1), number(box.x2), number(box.y2)});
}

BBox bbox_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw InputError("bbox must be an array of four numbers");
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError("bbox must be an array of four numbers");
  }
  BBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!box.valid()) throw InputError("invalid bbox " + j.dump());
  return box;
}

OrderedJson record_to_json(const GroundingRecord& r) {
  OrderedJson j;
  j["id"] = r.id;
  j["image"] = r.image;
  j["width"] = r.dims.width;
  j["height"] = r.dims.height;
  j["instruction"] = r.instruction;
  j["bbox"] = bbox_to_json(r.gt_box);
  j["source"] = to_string(r.source);
  j["platform"] = to_string(r.platform);
  if (r.elem_type) j["elem_type"] = to_string(*r.elem_type);
  return j;
}

GroundingRecord record_from_json(const Json& j) {
  GroundingRecord r;
  r.id = j.at("id").get<std::string>();
  r.image = j.at("image").get<std::string>();
  r.dims = ImageDims{j.at("width").get<std::int64_t>(), j.at("height").get<std::int64_t>()};
  r.instruction = j.at("instruction").get<std::string>();
  r.gt_box = bbox_from_json(j.at("bbox"));
  r.source = parse_source(j.value("source", std::string("other")));
  r.platform = parse_platform(j.at("platform").get<std::string>());
  if (j.contains("elem_type") && !j.at("elem_type").is_null()) {
    r.elem_type = parse_elem_type(j.at("elem_type").get<std::string>());
  }
  validate(r);
  return r;
}

std::vector<GroundingRecord> read_records(const std::filesystem::path& path) {
  std::vector<GroundingRecord> out;
  for_each_jsonl(path, [&](const Json& row) { out.push_back(record_from_json(row)); });
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<GroundingRecord>& records) {
  std::vector<OrderedJson> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(record_to_json(r));
  write_jsonl(path, rows);
}

namespace {

void put_prediction(OrderedJson& j, const GroundResult& g) {
  j["raw_output"] = g.raw_output;
  j["bbox"] = g.parsed_box ? bbox_to_json(*g.parsed_box) : OrderedJson(nullptr);
  j["model_width"] = g.model_dims.width;
  j["model_height"] = g.model_dims.height;
}

}  // namespace

OrderedJson ground_result_to_json(const std::string& model, const std::string& record_id, const GroundResult& g) {
  OrderedJson j;
  j["model"] = model;
  j["id"] = record_id;
  put_prediction(j, g);
  return j;
}

GroundResult ground_result_from_json(const Json& j) {
  GroundResult g;
  g.raw_output = j.at("raw_output").get<std::string>();
  if (!j.at("bbox").is_null()) g.parsed_box = bbox_from_json(j.at("bbox"));
  g.model_dims = ImageDims{j.at("model_width").get<std::int64_t>(), j.at("model_height").get<std::int64_t>()};
  return g;
}

OrderedJson outcome_to_json(const DifficultyOutcome& o) {
  OrderedJson j;
  j["id"] = o.record_id;
  j["label"] = to_string(o.label);
  put_prediction(j, o.prediction);
  return j;
}

DifficultyOutcome outcome_from_json(const Json& j) {
  return DifficultyOutcome{j.at("id").get<std::string>(), ground_result_from_json(j),
                           parse_difficulty(j.at("label").get<std::string>())};
}

OrderedJson triplet_to_json(const RankerTriplet& t) {
  OrderedJson j;
  j["id"] = t.id;
  j["image"] = t.image;
  j["text"] = t.text;
  j["bbox"] = bbox_to_json(t.box);
  j["label"] = to_string(t.label);
  j["origin"] = to_string(t.origin);
  return j;
}

RankerTriplet triplet_from_json(const Json& j) {
  RankerTriplet t;
  t.id = j.at("id").get<std::string>();
  t.image = j.at("image").get<std::string>();
  t.text = j.at("text").get<std::string>();
  t.box = bbox_from_json(j.at("bbox"));
  t.label = parse_label(j.at("label").get<std::string>());
  t.origin = parse_origin(j.at("origin").get<std::string>());
  return t;
}

RewardInput reward_input_from_json(const Json& j) {
  // The field is spelled gt_bbox in the row schema; gt_box is accepted as an alias.
  const Json& gt = j.contains("gt_bbox") ? j.at("gt_bbox") : j.at("gt_box");
  return RewardInput{j.at("id").get<std::string>(), j.at("text").get<std::string>(), bbox_from_json(gt)};
}

OrderedJson reward_output_to_json(const std::string& id, const RewardBreakdown& r) {
  OrderedJson j;
  j["id"] = id;
  j["format"] = r.format;
  j["solution"] = r.solution;
  j["length"] = r.length;
  j["total"] = r.total;
  return j;
}

OrderedJson embedding_to_json(const std::string& id, const std::vector<double>& values) {
  OrderedJson j;
  j["id"] = id;
  j["vector"] = values;
  return j;
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;
  for_each_jsonl(path, [&](const Json& row) {
    ids.push_back(row.at("id").get<std::string>());
    vectors.push_back(row.at("vector").get<std::vector<double>>());
    if (vectors.back().size() != vectors.front().size()) {
      throw ConsistencyError("embedding " + ids.back() + " has dimension " + std::to_string(vectors.back().size()) +
                             ", expected " + std::to_string(vectors.front().size()));
    }
  });
  EmbeddingMatrix m;
  const Eigen::Index d = vectors.empty() ? 0 : static_cast<Eigen::Index>(vectors.front().size());
  m.rows.resize(static_cast<Eigen::Index>(vectors.size()), d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (Eigen::Index c = 0; c < d; ++c) m.rows(static_cast<Eigen::Index>(i), c) = vectors[i][static_cast<std::size_t>(c)];
  }
  m.ids = std::move(ids);
  m.validate();
  return m;
}

OrderedJson trace_to_json(const std::string& id, const TraceResult& t) {
  OrderedJson j;
  j["id"] = id;
  j["trace"] = t.trace;
  OrderedJson violations = OrderedJson::array();
  for (auto v : t.violations) violations.push_back(to_string(v));
  j["violations"] = violations;
  return j;
}

}  // namespace curate
