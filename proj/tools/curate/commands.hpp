#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace curate::cli {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool mock = false;
};

void add_partition(CLI::App& app, Globals& g);
void add_ranker_data(CLI::App& app, Globals& g);
void add_select_diverse(CLI::App& app, Globals& g);
void add_rewards(CLI::App& app, Globals& g);
void add_eval(CLI::App& app, Globals& g);
void add_convert(CLI::App& app, Globals& g);
void add_run(CLI::App& app, Globals& g);
void add_assemble(CLI::App& app, Globals& g);
void add_serve_review(CLI::App& app, Globals& g);

}  // namespace curate::cli
