#include "curate/assemble.hpp"

#include <fstream>
#include <set>

#include "curate/errors.hpp"
#include "curate/review.hpp"

namespace curate {

namespace fs = std::filesystem;

AssembledDataset assemble_final(const fs::path& out_dir) {
  const fs::path survivors_path = out_dir / "survivors.jsonl";
  if (!fs::exists(survivors_path)) throw InputError("no survivors.jsonl under " + out_dir.string());
  auto survivors = read_records(survivors_path);
  sort_by_id(survivors);

  std::map<std::string, ReviewDecision> decided;
  if (fs::exists(out_dir / "decisions.jsonl")) {
    auto history = DecisionLog(out_dir / "decisions.jsonl").load();
    decided = effective_decisions(history);
  }

  AssembledDataset out;
  std::set<std::string> accepted_ids;
  std::set<std::string> survivor_ids;
  for (const auto& r : survivors) {
    survivor_ids.insert(r.id);
    auto it = decided.find(r.id);
    if (it == decided.end()) {
      out.pending.push_back(r.id);
    } else if (it->second.verdict == Verdict::Accept) {
      accepted_ids.insert(r.id);
      out.accepted.push_back(r);
    } else {
      out.rejected.push_back(r.id);
    }
  }
  for (const auto& [id, d] : decided) {
    if (!survivor_ids.contains(id)) out.unknown_decisions.push_back(id);
  }

  if (fs::exists(out_dir / "traces.jsonl")) {
    std::map<std::string, OrderedJson> traces;
    for_each_jsonl(out_dir / "traces.jsonl", [&](const Json& row) {
      const auto id = row.at("id").get<std::string>();
      if (accepted_ids.contains(id) && row.value("violations", Json::array()).empty()) {
        traces[id] = OrderedJson::parse(row.dump());
      }
    });
    for (auto& [id, row] : traces) out.traces.push_back(std::move(row));
  }
  return out;
}

void write_assembled(const AssembledDataset& data, const fs::path& dest_dir) {
  fs::create_directories(dest_dir);
  write_records(dest_dir / "records.jsonl", data.accepted);
  write_jsonl(dest_dir / "traces.jsonl", data.traces);
  OrderedJson summary;
  summary["accepted"] = data.accepted.size();
  summary["rejected"] = data.rejected.size();
  summary["pending"] = data.pending.size();
  summary["traces"] = data.traces.size();
  summary["unknown_decisions"] = data.unknown_decisions;
  std::ofstream out(dest_dir / "summary.json", std::ios::trunc);
  if (!out) throw InputError("cannot write " + (dest_dir / "summary.json").string());
  out << summary.dump(2) << '\n';
}

}  // namespace curate
