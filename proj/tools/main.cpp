// SPDX-License-Identifier: Apache-2.0
//
// tamedch: stochastic Cahn-Hilliard simulations and strong-convergence studies.
//
//   tamedch simulate    --config run.cfg
//   tamedch convergence --config run.cfg [--seed U64] [--workers INT] [--out DIR]
//   tamedch blowup      --config run.cfg
//   tamedch compare     --config run.cfg
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tamedch/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral Galerkin / tamed exponential Euler solver for the stochastic Cahn-Hilliard equation"};
  app.require_subcommand(1);

  tamedch::CliOptions options;
  std::uint64_t seed = 0;
  std::string out_dir;

  for (const char* name : {"simulate", "convergence", "blowup", "compare"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config_path, "Run configuration file")->required();
    sub->add_option("--seed", seed, "Master seed (overrides noise.seed)");
    sub->add_option("--workers", options.workers, "Maximum worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "Output directory (overrides out.dir)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error:config:" << e.what() << '\n';
    return tamedch::kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed") > 0) options.seed = seed;
  if (chosen->count("--out") > 0) options.out_dir = out_dir;
  return tamedch::run_command(chosen->get_name(), options, std::cerr);
}
