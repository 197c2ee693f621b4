#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "curate/record.hpp"
#include "curate/schema.hpp"

namespace curate {

// The reviewed dataset: survivors with an effective "accept" decision.
struct AssembledDataset {
  std::vector<GroundingRecord> accepted;
  std::vector<OrderedJson> traces;  // clean traces of accepted records only
  std::vector<std::string> pending;
  std::vector<std::string> rejected;
  std::vector<std::string> unknown_decisions;  // decided ids that are not survivors
};

// Reads survivors.jsonl, decisions.jsonl and (if present) traces.jsonl from a
// pipeline output directory.
AssembledDataset assemble_final(const std::filesystem::path& out_dir);

// Writes records.jsonl, traces.jsonl and summary.json into `dest_dir`.
void write_assembled(const AssembledDataset& data, const std::filesystem::path& dest_dir);

}  // namespace curate
