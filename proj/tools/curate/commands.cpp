#include "commands.hpp"

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <fstream>
#include <memory>
#include <set>
#include <variant>

#include "curate/assemble.hpp"
#include "curate/benchmark_io.hpp"
#include "curate/config.hpp"
#include "curate/difficulty.hpp"
#include "curate/errors.hpp"
#include "curate/metrics.hpp"
#include "curate/pipeline.hpp"
#include "curate/ranker_data.hpp"
#include "curate/review_server.hpp"
#include "curate/reward.hpp"
#include "curate/schema.hpp"

namespace curate::cli {

namespace fs = std::filesystem;

namespace {

std::uint64_t require_seed(const Globals& g) {
  if (g.seed) return *g.seed;
  if (!g.config.empty()) return PipelineConfig::load(g.config).seed;
  throw InputError("this command needs an explicit --seed (or a --config carrying one)");
}

std::unique_ptr<ModelClient> make_client(const Globals& g, const std::string& stage) {
  if (!g.config.empty()) {
    PipelineConfig cfg = PipelineConfig::load(g.config);
    if (g.mock) cfg.mock = true;
    if (g.seed) cfg.seed = *g.seed;
    return default_client_factory(cfg)(stage, cfg.client_for(stage));
  }
  if (!g.mock) throw InputError("pass --config with client settings, or --mock");
  PipelineConfig cfg;
  cfg.mock = true;
  cfg.seed = require_seed(g);
  return default_client_factory(cfg)(stage, cfg.client_for(stage));
}

void write_deferred(const fs::path& path, const std::vector<DeferredRecord>& deferred) {
  std::vector<OrderedJson> rows;
  for (const auto& d : deferred) rows.push_back({{"id", d.record_id}, {"reason", d.reason}, {"attempts", d.attempts}});
  write_jsonl(path, rows);
}

PredictionMap read_predictions(const fs::path& path) {
  PredictionMap out;
  for_each_jsonl(path, [&](const Json& row) {
    const auto id = row.at("id").get<std::string>();
    if (row.contains("point") && !row["point"].is_null()) {
      out[id] = Point{row["point"][0].get<double>(), row["point"][1].get<double>()};
    } else if (row.contains("bbox") && !row["bbox"].is_null()) {
      const auto& b = row["bbox"];
      out[id] = BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    } else {
      out[id] = std::nullopt;  // present but unparseable: scored as a miss
    }
  });
  return out;
}

}  // namespace

void add_partition(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("partition", "split records into easy / hard with the base grounding model");
  auto records = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto cache_path = std::make_shared<std::string>();
  cmd->add_option("--records", *records, "GroundingRecord JSONL")->required();
  cmd->add_option("--out-dir", *out_dir, "output directory")->required();
  cmd->add_option("--cache", *cache_path, "prediction cache (default <out-dir>/predictions.jsonl)");
  cmd->callback([=, &g] {
    fs::create_directories(*out_dir);
    auto recs = read_records(*records);
    auto client = make_client(g, "difficulty");
    PredictionCache cache(cache_path->empty() ? fs::path(*out_dir) / "predictions.jsonl" : fs::path(*cache_path));
    auto part = partition_by_difficulty(recs, *client, cache);
    write_records(fs::path(*out_dir) / "easy.jsonl", part.easy);
    write_records(fs::path(*out_dir) / "hard.jsonl", part.hard);
    std::vector<OrderedJson> rows;
    for (const auto& o : part.outcomes) rows.push_back(outcome_to_json(o));
    write_jsonl(fs::path(*out_dir) / "outcomes.jsonl", rows);
    write_deferred(fs::path(*out_dir) / "deferred.jsonl", part.deferred);
    std::cout << "easy " << part.easy.size() << "  hard " << part.hard.size() << "  deferred "
              << part.deferred.size() << "  requests " << part.requests << '\n';
  });
}

void add_ranker_data(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("build-ranker-data", "build (image, text, box, label) ranker triplets");
  struct Opts {
    std::string records, outcomes, out;
    bool benchmark = false;
    std::optional<std::size_t> m_aria, m_showui;
    double p = 0.5;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--records", o->records, "GroundingRecord JSONL")->required();
  cmd->add_option("--outcomes", o->outcomes, "difficulty outcomes JSONL (training mode)");
  cmd->add_option("--out", o->out, "triplet JSONL")->required();
  cmd->add_flag("--benchmark", o->benchmark, "expand a benchmark into all positive / negative pairs");
  cmd->add_option("--m-aria", o->m_aria, "eligibility threshold for AriaUI sources");
  cmd->add_option("--m-showui", o->m_showui, "eligibility threshold for ShowUI-Desktop");
  cmd->add_option("--positive-probability", o->p, "chance of keeping an annotation as a positive");
  cmd->callback([o, &g] {
    auto recs = read_records(o->records);
    std::vector<OrderedJson> rows;
    if (o->benchmark) {
      auto exp = expand_benchmark_binary(group_by_image(recs));
      for (const auto& t : exp.triplets) rows.push_back(triplet_to_json(t));
      write_jsonl(o->out, rows);
      std::cout << "triplets " << exp.triplets.size() << "  negatives " << exp.negatives() << "  negative fraction "
                << exp.negative_fraction() << "  duplicates dropped " << exp.duplicates.size() << '\n';
      return;
    }
    if (o->outcomes.empty()) throw InputError("--outcomes is required unless --benchmark is given");
    std::vector<DifficultyOutcome> outcomes;
    for_each_jsonl(o->outcomes, [&](const Json& row) { outcomes.push_back(outcome_from_json(row)); });
    std::set<std::string> easy_ids;
    for (const auto& oc : outcomes) {
      if (oc.label == Difficulty::Easy) easy_ids.insert(oc.record_id);
    }
    std::vector<GroundingRecord> easy;
    for (auto& r : recs) {
      if (easy_ids.contains(r.id)) easy.push_back(std::move(r));
    }
    EligibilityRule rule;
    if (o->m_aria) {
      for (Source s : {Source::AriaUIDesktop, Source::AriaUIMobile, Source::AriaUIWeb}) rule.set_threshold(s, *o->m_aria);
    }
    if (o->m_showui) rule.set_threshold(Source::ShowUIDesktop, *o->m_showui);
    auto triplets = build_training_triplets(easy, outcomes, rule, require_seed(g), TripletBuildOptions{o->p});
    std::size_t neg = 0;
    for (const auto& t : triplets) {
      rows.push_back(triplet_to_json(t));
      neg += t.label == Label::Negative;
    }
    write_jsonl(o->out, rows);
    std::cout << "triplets " << triplets.size() << "  negatives " << neg << '\n';
  });
}

void add_select_diverse(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("select-diverse", "keep one representative per k-means cluster");
  struct Opts {
    std::string records, embeddings, out, report, metric = "euclidean";
    double ratio = 0.10;
    std::size_t dim = 768;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--records", o->records, "GroundingRecord JSONL")->required();
  cmd->add_option("--embeddings", o->embeddings, "embedding JSONL {id, vector}")->required();
  cmd->add_option("--out", o->out, "selected records JSONL")->required();
  cmd->add_option("--ratio", o->ratio, "centroids per record");
  cmd->add_option("--dim", o->dim, "PCA output dimension");
  cmd->add_option("--metric", o->metric, "euclidean or cosine")->check(CLI::IsMember({"euclidean", "cosine"}));
  cmd->add_option("--report", o->report, "clustering report JSON");
  cmd->callback([o, &g] {
    auto recs = read_records(o->records);
    auto emb = read_embeddings(o->embeddings);
    DiversityOptions opts;
    opts.ratio = o->ratio;
    opts.target_dim = o->dim;
    opts.metric = o->metric == "cosine" ? DistanceMetric::Cosine : DistanceMetric::Euclidean;
    auto sel = select_diverse(recs, emb, opts, require_seed(g));
    std::set<std::string> keep(sel.selected_ids.begin(), sel.selected_ids.end());
    std::vector<GroundingRecord> out;
    for (const auto& r : recs) {
      if (keep.contains(r.id)) out.push_back(r);
    }
    sort_by_id(out);
    write_records(o->out, out);
    if (!o->report.empty()) {
      OrderedJson rep;
      rep["k"] = sel.clustering.k();
      rep["pca_dim"] = sel.pca.output_dim();
      rep["inertia"] = sel.clustering.inertia;
      rep["iterations"] = sel.clustering.iterations;
      rep["converged"] = sel.clustering.converged;
      rep["cluster_sizes"] = sel.clustering.cluster_sizes();
      rep["selected"] = sel.selected_ids;
      std::ofstream(o->report) << rep.dump(2) << '\n';
    }
    std::cout << "selected " << out.size() << " of " << recs.size() << '\n';
  });
}

void add_rewards(CLI::App& app, Globals&) {
  auto* cmd = app.add_subcommand("rewards", "score rollouts: format + solution + length");
  struct Opts {
    std::string in, out, tokenizer = "whitespace";
    std::size_t limit = 100;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--in", o->in, "JSONL {id, text, gt_bbox}")->required();
  cmd->add_option("--out", o->out, "JSONL {id, format, solution, length, total}")->required();
  cmd->add_option("--token-limit", o->limit, "length reward threshold");
  cmd->add_option("--tokenizer", o->tokenizer, "whitespace or bytes");
  cmd->callback([o] {
    RewardConfig cfg;
    cfg.token_limit = o->limit;
    cfg.tokenizer = parse_token_counter(o->tokenizer);
    cfg.validate();
    std::vector<RewardInput> inputs;
    for_each_jsonl(o->in, [&](const Json& row) { inputs.push_back(reward_input_from_json(row)); });
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<OrderedJson> rows;
    rows.reserve(inputs.size());
    for (const auto& in : inputs) rows.push_back(reward_output_to_json(in.id, reward_breakdown(in.text, in.gt, cfg)));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_jsonl(o->out, rows);
    std::cerr << "scored " << rows.size() << " rollouts (" << cfg.tag() << ")";
    if (secs > 0) std::cerr << " at " << static_cast<long long>(rows.size() / secs) << "/s";
    std::cerr << '\n';
  });
}

void add_eval(CLI::App& app, Globals&) {
  auto* cmd = app.add_subcommand("eval", "evaluation metrics");
  cmd->require_subcommand(1);

  auto* grounding = cmd->add_subcommand("grounding", "per-cell, micro and macro grounding accuracy");
  auto records = std::make_shared<std::string>();
  auto preds = std::make_shared<std::string>();
  auto label = std::make_shared<std::string>("model");
  grounding->add_option("--records", *records, "benchmark GroundingRecord JSONL")->required();
  grounding->add_option("--predictions", *preds, "JSONL {id, point|bbox}")->required();
  grounding->add_option("--label", *label, "row label");
  grounding->callback([=] {
    auto gold = read_records(*records);
    auto report = grounding_report(read_predictions(*preds), gold);
    std::cout << format_grounding_table(report, *label);
    if (!report.missing_predictions.empty()) std::cout << "missing predictions: " << report.missing_predictions.size() << '\n';
    if (!report.unkeyed.empty()) std::cout << "records without element type (excluded): " << report.unkeyed.size() << '\n';
  });

  auto* classification = cmd->add_subcommand("classification", "ranker precision / recall / F1");
  auto rows_path = std::make_shared<std::string>();
  classification->add_option("--in", *rows_path, "JSONL {id, label, pred}")->required();
  classification->callback([=] {
    std::vector<Label> labels, predictions;
    for_each_jsonl(*rows_path, [&](const Json& row) {
      labels.push_back(parse_label(row.at("label").get<std::string>()));
      predictions.push_back(parse_label(row.at("pred").get<std::string>()));
    });
    std::cout << format_classification_table(classification_report(labels, predictions));
  });

  auto* element = cmd->add_subcommand("element", "element accuracy of predicted points");
  auto erecords = std::make_shared<std::string>();
  auto epreds = std::make_shared<std::string>();
  element->add_option("--records", *erecords, "GroundingRecord JSONL")->required();
  element->add_option("--predictions", *epreds, "JSONL {id, point}")->required();
  element->callback([=] {
    std::map<std::string, BBox> gold;
    for (const auto& r : read_records(*erecords)) gold[r.id] = r.gt_box;
    std::map<std::string, Point> points;
    for (const auto& [id, p] : read_predictions(*epreds)) {
      if (!p) continue;
      points[id] = std::holds_alternative<Point>(*p) ? std::get<Point>(*p) : std::get<BBox>(*p).center();
    }
    auto acc = element_accuracy(points, gold);
    std::cout << "element accuracy " << acc.accuracy * 100.0 << "% (" << acc.correct << "/" << acc.total
              << ", missing " << acc.missing.size() << ")\n";
  });
}

void add_convert(CLI::App& app, Globals&) {
  auto* cmd = app.add_subcommand("convert-benchmark", "convert benchmark annotations to GroundingRecord JSONL");
  struct Opts {
    std::string in, out, image_dir, platform;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--in", o->in, "annotation file")->required();
  cmd->add_option("--out", o->out, "GroundingRecord JSONL")->required();
  cmd->add_option("--image-dir", o->image_dir, "screenshot directory");
  cmd->add_option("--platform", o->platform, "mobile, desktop or web (default: inferred)");
  cmd->callback([o] {
    std::optional<Platform> platform;
    if (!o->platform.empty()) platform = parse_platform(o->platform);
    auto recs = read_benchmark(o->in, o->image_dir, platform);
    write_records(o->out, recs);
    std::cout << "wrote " << recs.size() << " records\n";
  });
}

void add_run(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("run", "run the full curation pipeline from --config");
  auto out_dir = std::make_shared<std::string>();
  cmd->add_option("--output-dir", *out_dir, "override output_dir");
  cmd->callback([out_dir, &g] {
    if (g.config.empty()) throw InputError("run needs --config");
    PipelineConfig cfg = PipelineConfig::load(g.config);
    if (g.seed) cfg.seed = *g.seed;
    if (g.mock) cfg.mock = true;
    if (!out_dir->empty()) cfg.output_dir = *out_dir;
    auto run = run_pipeline(cfg);
    for (const auto& s : run.manifest.stages) {
      std::cout << s.name << ": " << s.input_count << " -> " << s.output_count;
      if (s.deferred) std::cout << " (deferred " << s.deferred << ")";
      if (s.reused) std::cout << " [reused]";
      std::cout << "  requests " << s.model_requests << '\n';
    }
    std::cout << "survivors " << run.survivors.size() << ", pending review " << run.manifest.pending_review
              << ", ranker triplets " << run.manifest.ranker_triplets << '\n';
  });
}

void add_assemble(CLI::App& app, Globals&) {
  auto* cmd = app.add_subcommand("assemble", "assemble accepted records and clean traces after review");
  auto out_dir = std::make_shared<std::string>();
  auto dest = std::make_shared<std::string>();
  cmd->add_option("--out-dir", *out_dir, "pipeline output directory")->required();
  cmd->add_option("--dest", *dest, "destination directory (default <out-dir>/final)");
  cmd->callback([=] {
    auto data = assemble_final(*out_dir);
    write_assembled(data, dest->empty() ? fs::path(*out_dir) / "final" : fs::path(*dest));
    std::cout << "accepted " << data.accepted.size() << ", rejected " << data.rejected.size() << ", pending "
              << data.pending.size() << ", traces " << data.traces.size() << '\n';
    if (!data.unknown_decisions.empty()) {
      std::cout << "decisions for unknown ids: " << data.unknown_decisions.size() << '\n';
    }
  });
}

namespace {
ReviewServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

void add_serve_review(CLI::App& app, Globals&) {
  auto* cmd = app.add_subcommand("serve-review", "serve the review API over a pipeline output directory");
  struct Opts {
    std::string out_dir, image_root, token_env = "CURATE_REVIEW_TOKEN";
    ReviewServerOptions server;
  };
  auto o = std::make_shared<Opts>();
  o->server.port = 8080;
  cmd->add_option("--out-dir", o->out_dir, "pipeline output directory")->required();
  cmd->add_option("--image-root", o->image_root, "base directory for relative screenshot paths");
  cmd->add_option("--host", o->server.host, "bind address");
  cmd->add_option("--port", o->server.port, "port (0 picks a free one)");
  cmd->add_option("--token-env", o->token_env, "environment variable holding the bearer token");
  cmd->add_option("--static-dir", o->server.static_dir, "built review UI to serve at /");
  cmd->callback([o] {
    if (const char* t = std::getenv(o->token_env.c_str())) o->server.token = t;
    auto service = ReviewService::from_output_dir(o->out_dir, o->image_root);
    ReviewServer server(service, o->server);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "reviewing " << service.size() << " items on " << o->server.host << ":" << o->server.port
              << (o->server.token.empty() ? "" : " (token required)") << std::endl;
    server.run();
    g_server = nullptr;
  });
}

}  // namespace curate::cli
