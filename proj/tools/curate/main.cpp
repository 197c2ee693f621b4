#include <iostream>

#include "commands.hpp"
#include "curate/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"curate: GUI grounding data curation"};
  app.require_subcommand(1);
  curate::cli::Globals g;
  app.add_option("--config", g.config, "pipeline config (JSON)");
  app.add_option("--seed", g.seed, "random seed");
  app.add_flag("--mock", g.mock, "use the deterministic mock model backend");

  curate::cli::add_partition(app, g);
  curate::cli::add_ranker_data(app, g);
  curate::cli::add_select_diverse(app, g);
  curate::cli::add_rewards(app, g);
  curate::cli::add_eval(app, g);
  curate::cli::add_convert(app, g);
  curate::cli::add_run(app, g);
  curate::cli::add_assemble(app, g);
  curate::cli::add_serve_review(app, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const curate::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const curate::ConsistencyError& e) {
    std::cerr << "consistency error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
