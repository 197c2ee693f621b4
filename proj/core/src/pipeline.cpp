#include "curate/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "curate/difficulty.hpp"
#include "curate/digest.hpp"
#include "curate/diversity.hpp"
#include "curate/errors.hpp"
#include "curate/parallel.hpp"
#include "curate/random.hpp"
#include "curate/ranker_data.hpp"
#include "curate/review.hpp"
#include "curate/trace.hpp"

namespace curate {

namespace fs = std::filesystem;

std::vector<GroundingRecord> downsample(std::vector<GroundingRecord> records, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("downsample fraction must lie in (0, 1]");
  sort_by_id(records);
  if (records.empty() || fraction == 1.0) return records;
  auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(records.size())));
  keep = std::clamp<std::size_t>(keep, 1, records.size());
  Rng rng(seed);
  // Partial Fisher-Yates with the portable index draw.
  for (std::size_t i = 0; i < keep; ++i) {
    std::size_t j = i + uniform_index(rng, records.size() - i);
    std::swap(records[i], records[j]);
  }
  records.resize(keep);
  sort_by_id(records);
  return records;
}

OrderedJson stage_report_to_json(const StageReport& s) {
  OrderedJson j;
  j["name"] = s.name;
  j["input_count"] = s.input_count;
  j["output_count"] = s.output_count;
  j["config_digest"] = s.config_digest;
  j["content_digest"] = s.content_digest;
  j["started"] = s.started;
  j["finished"] = s.finished;
  j["deferred"] = s.deferred;
  j["errors"] = s.errors;
  j["model_requests"] = s.model_requests;
  j["reused"] = s.reused;
  return j;
}

StageReport stage_report_from_json(const Json& j) {
  StageReport s;
  s.name = j.at("name").get<std::string>();
  s.input_count = j.at("input_count").get<std::size_t>();
  s.output_count = j.at("output_count").get<std::size_t>();
  s.config_digest = j.at("config_digest").get<std::string>();
  s.content_digest = j.at("content_digest").get<std::string>();
  s.started = j.value("started", std::string());
  s.finished = j.value("finished", std::string());
  s.deferred = j.value("deferred", std::size_t{0});
  s.errors = j.value("errors", std::size_t{0});
  s.model_requests = j.value("model_requests", std::uint64_t{0});
  s.reused = j.value("reused", false);
  return s;
}

const StageReport* PipelineManifest::find(std::string_view name) const noexcept {
  for (const auto& s : stages) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::uint64_t PipelineManifest::total_requests() const noexcept {
  std::uint64_t n = 0;
  for (const auto& s : stages) n += s.model_requests;
  return n;
}

OrderedJson PipelineManifest::to_json() const {
  OrderedJson j;
  j["seed"] = seed;
  j["config_digest"] = config_digest;
  j["complete"] = complete;
  j["ranker_triplets"] = ranker_triplets;
  j["pending_review"] = pending_review;
  OrderedJson st = OrderedJson::array();
  for (const auto& s : stages) st.push_back(stage_report_to_json(s));
  j["stages"] = st;
  return j;
}

PipelineManifest PipelineManifest::from_json(const Json& j) {
  PipelineManifest m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config_digest = j.at("config_digest").get<std::string>();
  m.complete = j.value("complete", false);
  m.ranker_triplets = j.value("ranker_triplets", std::size_t{0});
  m.pending_review = j.value("pending_review", std::size_t{0});
  for (const auto& s : j.at("stages")) m.stages.push_back(stage_report_from_json(s));
  return m;
}

ClientFactory default_client_factory(const PipelineConfig& config) {
  if (config.mock) {
    MockBehavior behavior = config.mock_behavior;
    behavior.seed = config.seed;
    return [behavior](const std::string&, const ClientConfig& cc) -> std::unique_ptr<ModelClient> {
      ClientConfig c = cc;
      // Cached predictions must not leak between mock behaviours.
      std::ostringstream tag;
      tag << behavior.seed << '/' << behavior.hit_rate << '/' << behavior.unparseable_rate << '/'
          << behavior.align_positive_rate << '/' << behavior.ambiguity_positive_rate << '/'
          << behavior.embedding_dim;
      c.model += "@mock-" + sha256_hex(tag.str()).substr(0, 12);
      return std::make_unique<MockClient>(std::move(c), behavior);
    };
  }
  std::string root = config.image_root;
  return [root](const std::string&, const ClientConfig& cc) -> std::unique_ptr<ModelClient> {
    auto client = std::make_unique<HttpModelClient>(cc);
    client->set_image_root(root);
    return client;
  };
}

std::string records_digest(const std::vector<GroundingRecord>& records) {
  std::vector<std::pair<std::string, std::string>> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.emplace_back(r.id, dump_row(record_to_json(r)));
  return content_digest(std::move(rows));
}

namespace {

struct StageOutput {
  std::vector<GroundingRecord> records;
  std::vector<DeferredRecord> deferred;
  std::size_t errors = 0;
  std::uint64_t requests = 0;
};

OrderedJson deferred_to_json(const DeferredRecord& d) {
  OrderedJson j;
  j["id"] = d.record_id;
  j["reason"] = d.reason;
  j["attempts"] = d.attempts;
  return j;
}

std::string file_sha256(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void write_json_file(const fs::path& path, const OrderedJson& j) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, path);
}

std::optional<PipelineManifest> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return PipelineManifest::from_json(Json::parse(in));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

template <class T>
std::vector<T> collect_ok(std::vector<Outcome<T>>& results) {
  std::vector<T> out;
  for (auto& r : results) {
    if (r.ok()) out.push_back(std::move(*r.value));
  }
  return out;
}

// Sorts a per-record failure into deferred (transient or unparseable output) or
// rethrows it (anything that means the run itself is wrong).
void absorb_failure(const std::exception_ptr& error, const std::string& id, StageOutput& out) {
  try {
    std::rethrow_exception(error);
  } catch (const RequestError& e) {
    out.deferred.push_back({id, e.what(), e.attempts()});
  } catch (const RawTextError& e) {
    ++out.errors;
    out.deferred.push_back({id, e.what(), 1});
  }
}

class Runner {
 public:
  Runner(const PipelineConfig& cfg, ClientFactory factory)
      : cfg_(cfg), factory_(std::move(factory)), out_dir_(cfg.output_dir), stages_dir_(out_dir_ / "stages") {
    if (!factory_) factory_ = default_client_factory(cfg_);
    for (const auto& d : cfg_.datasets) {
      if (!d.cluster) continue;
      cluster_sources_.insert(d.source);
      // AriaUI splits are clustered jointly.
      if (is_aria_ui(d.source)) cluster_sources_.insert({Source::AriaUIDesktop, Source::AriaUIMobile, Source::AriaUIWeb});
    }
  }

  PipelineRun run() {
    fs::create_directories(stages_dir_);
    fs::create_directories(out_dir_ / "cache");
    previous_ = load_manifest(out_dir_ / "manifest.json");
    manifest_.seed = cfg_.seed;
    manifest_.config_digest = sha256_hex(dump_row(cfg_.to_json()));
    write_json_file(out_dir_ / "config.json", cfg_.to_json());

    try {
      auto records = stage("input", input_config(), {}, [&](const auto&) { return load_inputs(); });
      for (const auto& name : cfg_.stage_order) {
        if (name == "difficulty") {
          records = stage(name, client_stage_config("difficulty", {{"ranker_data", cfg_.ranker_data}}), records,
                          [&](const auto& in) { return run_difficulty(in); });
        } else if (name == "alignment") {
          records = stage(name, client_stage_config("alignment", {}), records,
                          [&](const auto& in) { return run_judge(in, "alignment", JudgeKind::Alignment); });
        } else if (name == "ambiguity") {
          records = stage(name, client_stage_config("ambiguity", {}), records,
                          [&](const auto& in) { return run_judge(in, "ambiguity", JudgeKind::Ambiguity); });
        } else if (name == "diversity") {
          records = stage(name, diversity_config(), records, [&](const auto& in) { return run_diversity(in); });
        } else {
          throw InputError("unknown stage " + name);
        }
      }
      if (cfg_.traces.enabled) {
        records = stage("traces", trace_config(), records, [&](const auto& in) { return run_traces(in); });
      }
      records = stage("review", OrderedJson::object(), records, [&](const auto& in) {
        StageOutput o;
        o.records = in;
        return o;
      });
      write_records(out_dir_ / "survivors.jsonl", records);
      manifest_.pending_review = count_pending(records);
      manifest_.complete = true;
      write_manifest();
      return {manifest_, std::move(records)};
    } catch (...) {
      write_manifest();
      throw;
    }
  }

 private:
  using Body = std::function<StageOutput(const std::vector<GroundingRecord>&)>;

  std::vector<GroundingRecord> stage(const std::string& name, const OrderedJson& stage_cfg,
                                     const std::vector<GroundingRecord>& input, const Body& body) {
    std::ostringstream prefix;
    prefix << (manifest_.stages.size() < 10 ? "0" : "") << manifest_.stages.size() << '_' << name;
    current_prefix_ = prefix.str();
    const fs::path out_path = stages_dir_ / (current_prefix_ + ".jsonl");

    StageReport report;
    report.name = name;
    report.input_count = input.size();
    report.config_digest = sha256_hex(name + '\x1f' + dump_row(stage_cfg) + '\x1f' + upstream_config_ + '\x1f' +
                                      upstream_content_);
    report.started = utc_timestamp_now();

    std::vector<GroundingRecord> output;
    bool reused = false;
    if (const StageReport* prev = previous_ ? previous_->find(name) : nullptr;
        prev && prev->config_digest == report.config_digest && fs::exists(out_path)) {
      try {
        auto cached = read_records(out_path);
        if (records_digest(cached) == prev->content_digest) {
          output = std::move(cached);
          report.deferred = prev->deferred;
          report.errors = prev->errors;
          reused = true;
          if (name == "difficulty") manifest_.ranker_triplets = previous_->ranker_triplets;
        }
      } catch (const InputError&) {
        reused = false;
      }
    }
    if (!reused) {
      StageOutput result = body(input);
      std::sort(result.deferred.begin(), result.deferred.end(),
                [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
      std::vector<OrderedJson> rows;
      for (const auto& d : result.deferred) rows.push_back(deferred_to_json(d));
      write_jsonl(stages_dir_ / (current_prefix_ + ".deferred.jsonl"), rows);
      sort_by_id(result.records);
      write_records(out_path, result.records);
      output = std::move(result.records);
      report.deferred = result.deferred.size();
      report.errors = result.errors;
      report.model_requests = result.requests;
    }
    report.reused = reused;
    report.output_count = output.size();
    report.content_digest = records_digest(output);
    report.finished = utc_timestamp_now();
    upstream_config_ = report.config_digest;
    upstream_content_ = report.content_digest;
    manifest_.stages.push_back(std::move(report));
    write_manifest();
    return output;
  }

  void write_manifest() { write_json_file(out_dir_ / "manifest.json", manifest_.to_json()); }

  fs::path side_path(const std::string& suffix) const { return stages_dir_ / (current_prefix_ + suffix); }

  OrderedJson input_config() const {
    OrderedJson j;
    j["seed"] = cfg_.seed;
    OrderedJson ds = OrderedJson::array();
    for (const auto& d : cfg_.datasets) {
      ds.push_back({{"source", to_string(d.source)},
                    {"downsample", d.downsample},
                    {"cluster", d.cluster},
                    {"sha256", file_sha256(d.path)}});
    }
    j["datasets"] = ds;
    return j;
  }

  OrderedJson client_stage_config(const std::string& client_stage, OrderedJson extra) const {
    OrderedJson j;
    j["client"] = client_config_to_json(cfg_.client_for(client_stage));
    j["mock"] = cfg_.mock;
    if (cfg_.mock) j["mock_behavior"] = cfg_.to_json()["mock_behavior"];
    j["seed"] = cfg_.seed;
    j["eligibility"] = cfg_.to_json()["eligibility"];
    for (auto& [k, v] : extra.items()) j[k] = v;
    return j;
  }

  OrderedJson diversity_config() const {
    OrderedJson j = client_stage_config("embedding", {});
    j["diversity"] = cfg_.to_json()["diversity"];
    OrderedJson srcs = OrderedJson::array();
    for (Source s : cluster_sources_) srcs.push_back(to_string(s));
    j["cluster_sources"] = srcs;
    return j;
  }

  OrderedJson trace_config() const {
    OrderedJson j = client_stage_config("traces", {});
    j["traces"] = cfg_.to_json()["traces"];
    j["image_root"] = cfg_.image_root;
    return j;
  }

  std::unique_ptr<ModelClient> client(const std::string& stage) {
    auto c = factory_(stage, cfg_.client_for(stage));
    if (!c) throw InputError("client factory returned nothing for stage " + stage);
    return c;
  }

  StageOutput load_inputs() {
    StageOutput out;
    for (std::size_t i = 0; i < cfg_.datasets.size(); ++i) {
      const auto& d = cfg_.datasets[i];
      auto records = read_records(d.path);
      if (d.source != Source::Other) {
        for (auto& r : records) {
          if (r.source == Source::Other) r.source = d.source;
        }
      }
      records = downsample(std::move(records), d.downsample, mix_seed(cfg_.seed, "downsample\x1f" + std::to_string(i)));
      out.records.insert(out.records.end(), std::make_move_iterator(records.begin()),
                         std::make_move_iterator(records.end()));
    }
    validate_dataset(out.records);
    return out;
  }

  StageOutput run_difficulty(const std::vector<GroundingRecord>& in) {
    auto model = client("difficulty");
    PredictionCache cache(out_dir_ / "cache" / "predictions.jsonl");
    DifficultyPartition part = partition_by_difficulty(in, *model, cache);

    std::vector<OrderedJson> rows;
    for (const auto& o : part.outcomes) rows.push_back(outcome_to_json(o));
    write_jsonl(side_path(".outcomes.jsonl"), rows);
    write_records(side_path(".easy.jsonl"), part.easy);

    if (cfg_.ranker_data) {
      auto triplets =
          build_training_triplets(part.easy, part.outcomes, cfg_.eligibility, mix_seed(cfg_.seed, "ranker-data"));
      std::vector<OrderedJson> trows;
      for (const auto& t : triplets) trows.push_back(triplet_to_json(t));
      write_jsonl(out_dir_ / "ranker_triplets.jsonl", trows);
      manifest_.ranker_triplets = triplets.size();
    }
    StageOutput out;
    out.records = std::move(part.hard);
    out.deferred = std::move(part.deferred);
    out.requests = part.requests;
    return out;
  }

  StageOutput run_judge(const std::vector<GroundingRecord>& in, const std::string& stage_name, JudgeKind kind) {
    auto model = client(stage_name);
    const auto before = model->requests_issued();
    auto results = parallel_map(in.size(), model->config().max_in_flight,
                                [&](std::size_t i) { return model->binary_judge(kind, in[i], in[i].gt_box); });
    StageOutput out;
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (!results[i].ok()) {
        absorb_failure(results[i].error, in[i].id, out);
      } else if (*results[i].value == Label::Positive) {
        out.records.push_back(in[i]);
      }
    }
    out.requests = model->requests_issued() - before;
    return out;
  }

  StageOutput run_diversity(const std::vector<GroundingRecord>& in) {
    StageOutput out;
    std::vector<GroundingRecord> flagged;
    for (const auto& r : in) {
      if (cluster_sources_.contains(r.source)) {
        flagged.push_back(r);
      } else {
        out.records.push_back(r);
      }
    }
    OrderedJson report;
    report["input"] = in.size();
    report["clustered_input"] = flagged.size();
    if (flagged.empty()) {
      write_jsonl(side_path(".embeddings.jsonl"), {});
      report["k"] = 0;
      write_json_file(out_dir_ / "clustering_report.json", report);
      return out;
    }

    auto model = client("embedding");
    const auto before = model->requests_issued();
    auto results = parallel_map(flagged.size(), model->config().max_in_flight,
                                [&](std::size_t i) { return model->embed(flagged[i]); });
    std::vector<GroundingRecord> embedded;
    std::vector<std::vector<double>> vectors;
    for (std::size_t i = 0; i < flagged.size(); ++i) {
      if (results[i].ok()) {
        embedded.push_back(flagged[i]);
        vectors.push_back(std::move(results[i].value->values));
      } else {
        absorb_failure(results[i].error, flagged[i].id, out);
      }
    }
    out.requests = model->requests_issued() - before;

    std::vector<OrderedJson> rows;
    for (std::size_t i = 0; i < embedded.size(); ++i) rows.push_back(embedding_to_json(embedded[i].id, vectors[i]));
    write_jsonl(side_path(".embeddings.jsonl"), rows);
    report["embedded"] = embedded.size();
    if (embedded.empty()) {
      report["k"] = 0;
      write_json_file(out_dir_ / "clustering_report.json", report);
      return out;
    }

    EmbeddingMatrix m;
    m.rows.resize(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(vectors.front().size()));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      m.ids.push_back(embedded[i].id);
      for (std::size_t c = 0; c < vectors[i].size(); ++c) {
        m.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = vectors[i][c];
      }
    }
    DiversitySelection sel = select_diverse(embedded, m, cfg_.diversity, mix_seed(cfg_.seed, "diversity"));
    std::set<std::string> keep(sel.selected_ids.begin(), sel.selected_ids.end());
    for (const auto& r : embedded) {
      if (keep.contains(r.id)) out.records.push_back(r);
    }
    report["k"] = sel.clustering.k();
    report["pca_dim"] = sel.pca.output_dim();
    report["inertia"] = sel.clustering.inertia;
    report["iterations"] = sel.clustering.iterations;
    report["converged"] = sel.clustering.converged;
    report["cluster_sizes"] = sel.clustering.cluster_sizes();
    report["selected"] = sel.selected_ids;
    write_json_file(out_dir_ / "clustering_report.json", report);
    return out;
  }

  StageOutput run_traces(const std::vector<GroundingRecord>& in) {
    auto model = client("traces");
    const auto before = model->requests_issued();
    auto results = parallel_map(in.size(), model->config().max_in_flight, [&](std::size_t i) {
      TraceRequest req = build_trace_request(in[i], cfg_.traces.style, cfg_.image_root);
      std::string raw = model->complete(req.prompt, ImagePayload{std::move(req.png), "image/png"});
      return parse_and_validate_trace(raw, cfg_.traces.rules);
    });
    StageOutput out;
    std::vector<OrderedJson> rows;
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (!results[i].ok()) {
        try {
          absorb_failure(results[i].error, in[i].id, out);
        } catch (const InputError& e) {
          // Missing or undecodable screenshot: nothing to annotate.
          out.deferred.push_back({in[i].id, e.what(), 0});
        }
        out.records.push_back(in[i]);
        continue;
      }
      rows.push_back(trace_to_json(in[i].id, *results[i].value));
      if (results[i].value->clean() || !cfg_.traces.drop_violations) out.records.push_back(in[i]);
    }
    write_jsonl(out_dir_ / "traces.jsonl", rows);
    out.requests = model->requests_issued() - before;
    return out;
  }

  std::size_t count_pending(const std::vector<GroundingRecord>& survivors) const {
    const fs::path log_path = out_dir_ / "decisions.jsonl";
    std::map<std::string, ReviewDecision> decided;
    if (fs::exists(log_path)) {
      auto history = DecisionLog(log_path).load();
      decided = effective_decisions(history);
    }
    return static_cast<std::size_t>(std::count_if(survivors.begin(), survivors.end(),
                                                  [&](const auto& r) { return !decided.contains(r.id); }));
  }

  const PipelineConfig& cfg_;
  ClientFactory factory_;
  fs::path out_dir_;
  fs::path stages_dir_;
  std::set<Source> cluster_sources_;
  std::optional<PipelineManifest> previous_;
  PipelineManifest manifest_;
  std::string upstream_config_;
  std::string upstream_content_;
  std::string current_prefix_;
};

}  // namespace

PipelineRun run_pipeline(const PipelineConfig& config, ClientFactory factory) {
  config.validate();
  return Runner(config, std::move(factory)).run();
}

}  // namespace curate
