#include "curate/config.hpp"

#include <algorithm>
#include <fstream>

#include "curate/errors.hpp"

namespace curate {

OrderedJson client_config_to_json(const ClientConfig& c) {
  OrderedJson j;
  j["endpoint"] = c.endpoint;
  j["embeddings_endpoint"] = c.embeddings_endpoint;
  j["model"] = c.model;
  j["timeout_seconds"] = c.timeout_seconds;
  j["max_in_flight"] = c.max_in_flight;
  j["retry_limit"] = c.retry_limit;
  j["backoff_seconds"] = c.backoff_seconds;
  j["auth_env"] = c.auth_env;
  j["patch"] = c.resize.patch;
  j["min_pixels"] = c.resize.min_pixels;
  j["max_pixels"] = c.resize.max_pixels;
  j["text_pointer"] = c.text_pointer;
  j["embedding_pointer"] = c.embedding_pointer;
  j["embedding_pooling"] = c.embedding_pooling;
  j["ground_prompt"] = c.ground_prompt;
  j["alignment_prompt"] = c.alignment_prompt;
  j["ambiguity_prompt"] = c.ambiguity_prompt;
  return j;
}

ClientConfig client_config_from_json(const Json& j) {
  ClientConfig c;
  if (!j.is_object()) throw InputError("client config must be an object");
  c.endpoint = j.value("endpoint", c.endpoint);
  c.embeddings_endpoint = j.value("embeddings_endpoint", c.embeddings_endpoint);
  c.model = j.value("model", c.model);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.retry_limit = j.value("retry_limit", c.retry_limit);
  c.backoff_seconds = j.value("backoff_seconds", c.backoff_seconds);
  c.auth_env = j.value("auth_env", c.auth_env);
  c.resize.patch = j.value("patch", c.resize.patch);
  c.resize.min_pixels = j.value("min_pixels", c.resize.min_pixels);
  c.resize.max_pixels = j.value("max_pixels", c.resize.max_pixels);
  c.text_pointer = j.value("text_pointer", c.text_pointer);
  c.embedding_pointer = j.value("embedding_pointer", c.embedding_pointer);
  c.embedding_pooling = j.value("embedding_pooling", c.embedding_pooling);
  c.ground_prompt = j.value("ground_prompt", c.ground_prompt);
  c.alignment_prompt = j.value("alignment_prompt", c.alignment_prompt);
  c.ambiguity_prompt = j.value("ambiguity_prompt", c.ambiguity_prompt);
  c.validate();
  return c;
}

namespace {

OrderedJson mock_to_json(const MockBehavior& m) {
  OrderedJson j;
  j["hit_rate"] = m.hit_rate;
  j["unparseable_rate"] = m.unparseable_rate;
  j["align_positive_rate"] = m.align_positive_rate;
  j["ambiguity_positive_rate"] = m.ambiguity_positive_rate;
  j["embedding_dim"] = m.embedding_dim;
  return j;
}

MockBehavior mock_from_json(const Json& j, std::uint64_t seed) {
  MockBehavior m;
  m.seed = seed;
  m.hit_rate = j.value("hit_rate", m.hit_rate);
  m.unparseable_rate = j.value("unparseable_rate", m.unparseable_rate);
  m.align_positive_rate = j.value("align_positive_rate", m.align_positive_rate);
  m.ambiguity_positive_rate = j.value("ambiguity_positive_rate", m.ambiguity_positive_rate);
  m.embedding_dim = j.value("embedding_dim", m.embedding_dim);
  return m;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

const std::vector<Source>& all_sources() {
  static const std::vector<Source> kAll = {Source::AriaUIDesktop, Source::AriaUIMobile, Source::AriaUIWeb,
                                           Source::ShowUIDesktop, Source::Other};
  return kAll;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InputError("pipeline config must be a JSON object");
  PipelineConfig cfg;
  try {
    if (!j.contains("seed") || !j.at("seed").is_number_integer() || j.at("seed").get<std::int64_t>() < 0) {
      throw InputError("pipeline config: an explicit non-negative integer 'seed' is required");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.output_dir = resolve(base_dir, j.value("output_dir", std::string("curate-out")));
    if (j.contains("image_root")) cfg.image_root = resolve(base_dir, j.at("image_root").get<std::string>()).string();
    cfg.mock = j.value("mock", false);
    cfg.mock_behavior = mock_from_json(j.value("mock_behavior", Json::object()), cfg.seed);

    for (const auto& d : j.value("datasets", Json::array())) {
      DatasetSpec spec;
      spec.source = parse_source(d.value("source", std::string("other")));
      spec.path = resolve(base_dir, d.at("path").get<std::string>());
      spec.downsample = d.value("downsample", 1.0);
      spec.cluster = d.value("cluster", is_aria_ui(spec.source));
      cfg.datasets.push_back(std::move(spec));
    }
    const Json clients = j.value("clients", Json::object());
    for (const auto& [stage, cj] : clients.items()) {
      cfg.clients[stage] = client_config_from_json(cj);
    }
    const Json eligibility = j.value("eligibility", Json::object());
    for (const auto& [source, m] : eligibility.items()) {
      cfg.eligibility.set_threshold(parse_source(source), m.get<std::size_t>());
    }
    const Json div = j.value("diversity", Json::object());
    cfg.diversity.ratio = div.value("ratio", cfg.diversity.ratio);
    cfg.diversity.target_dim = div.value("target_dim", cfg.diversity.target_dim);
    const std::string metric = div.value("metric", std::string("euclidean"));
    if (metric != "euclidean" && metric != "cosine") throw InputError("diversity.metric must be euclidean or cosine");
    cfg.diversity.metric = metric == "cosine" ? DistanceMetric::Cosine : DistanceMetric::Euclidean;
    cfg.diversity.kmeans.max_iterations = div.value("max_iterations", cfg.diversity.kmeans.max_iterations);
    cfg.diversity.kmeans.tolerance = div.value("tolerance", cfg.diversity.kmeans.tolerance);

    const Json rew = j.value("reward", Json::object());
    cfg.reward.token_limit = rew.value("token_limit", cfg.reward.token_limit);
    cfg.reward.tokenizer = parse_token_counter(rew.value("tokenizer", std::string("whitespace")));

    const Json tr = j.value("traces", Json::object());
    cfg.traces.enabled = tr.value("enabled", false);
    cfg.traces.drop_violations = tr.value("drop_violations", false);
    cfg.traces.style.line_width = tr.value("line_width", cfg.traces.style.line_width);
    if (tr.contains("color")) cfg.traces.style.color = tr.at("color").get<Rgb>();
    cfg.traces.rules.max_sentences = tr.value("max_sentences", cfg.traces.rules.max_sentences);
    if (tr.contains("forbidden_phrases")) {
      cfg.traces.rules.forbidden_phrases = tr.at("forbidden_phrases").get<std::vector<std::string>>();
    }
    if (j.contains("stage_order")) cfg.stage_order = j.at("stage_order").get<std::vector<std::string>>();
    cfg.ranker_data = j.value("ranker_data", true);
  } catch (const Json::exception& e) {
    throw InputError(std::string("pipeline config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

void PipelineConfig::validate() const {
  for (const auto& d : datasets) {
    if (!std::filesystem::exists(d.path)) throw InputError("dataset file does not exist: " + d.path.string());
    if (!(d.downsample > 0.0 && d.downsample <= 1.0)) {
      throw InputError("downsample fraction must lie in (0, 1] for " + d.path.string());
    }
  }
  diverse_count(1, diversity.ratio);
  reward.validate();
  auto sorted = stage_order;
  std::sort(sorted.begin(), sorted.end());
  auto expected = kFilterStages;
  std::sort(expected.begin(), expected.end());
  if (sorted != expected) {
    throw InputError("stage_order must be a permutation of difficulty, alignment, diversity, ambiguity");
  }
  for (const auto& [stage, c] : clients) c.validate();
}

ClientConfig PipelineConfig::client_for(const std::string& stage) const {
  auto it = clients.find(stage);
  if (it != clients.end()) return it->second;
  ClientConfig c;
  c.model = "mock-" + stage;
  return c;
}

OrderedJson PipelineConfig::to_json() const {
  OrderedJson j;
  j["seed"] = seed;
  j["image_root"] = image_root;
  j["mock"] = mock;
  j["mock_behavior"] = mock_to_json(mock_behavior);
  OrderedJson ds = OrderedJson::array();
  for (const auto& d : datasets) {
    ds.push_back({{"source", to_string(d.source)},
                  {"path", d.path.string()},
                  {"downsample", d.downsample},
                  {"cluster", d.cluster}});
  }
  j["datasets"] = ds;
  OrderedJson cl = OrderedJson::object();
  for (const auto& stage : {"difficulty", "alignment", "embedding", "ambiguity", "traces"}) {
    cl[stage] = client_config_to_json(client_for(stage));
  }
  j["clients"] = cl;
  OrderedJson el = OrderedJson::object();
  for (Source s : all_sources()) el[std::string(to_string(s))] = eligibility.threshold(s);
  j["eligibility"] = el;
  j["diversity"] = {{"ratio", diversity.ratio},
                    {"target_dim", diversity.target_dim},
                    {"metric", diversity.metric == DistanceMetric::Cosine ? "cosine" : "euclidean"},
                    {"max_iterations", diversity.kmeans.max_iterations},
                    {"tolerance", diversity.kmeans.tolerance}};
  j["reward"] = {{"tag", reward.tag()}};
  j["traces"] = {{"enabled", traces.enabled},
                 {"drop_violations", traces.drop_violations},
                 {"line_width", traces.style.line_width},
                 {"color", traces.style.color},
                 {"max_sentences", traces.rules.max_sentences},
                 {"forbidden_phrases", traces.rules.forbidden_phrases},
                 {"prompt_version", kCotPromptVersion}};
  j["stage_order"] = stage_order;
  j["ranker_data"] = ranker_data;
  return j;
}

}  // namespace curate
