// prhf: command line front end.
//
//   prhf <evolve|groundstate|critical|checks|initdata> --config PATH
//        [--output DIR] [--seed INT] [--resume SNAPSHOT] [--override-header]
//
// PRHF_THREADS sets the OpenMP worker count. Results do not depend on it.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "prhf/runner.hpp"

int main(int argc, char** argv) {
  if (const char* env = std::getenv("PRHF_THREADS")) {
    const int threads = std::atoi(env);
    if (threads < 1) {
      std::cerr << "error: PRHF_THREADS must be a positive integer\n";
      return 1;
    }
    omp_set_num_threads(threads);
  }

  CLI::App app{"Pseudo-relativistic Hartree / Hartree-Fock simulator"};
  app.require_subcommand(1);

  std::string config_path;
  prhf::CliOverrides cli;
  std::string output, resume;
  std::uint64_t seed = 0;

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const prhf::RunConfig&, const prhf::CliOverrides&);
  };
  const Command commands[] = {
      {"evolve", "Time evolution with diagnostics", prhf::run_evolve},
      {"groundstate", "Gradient-flow ground state", prhf::run_groundstate},
      {"critical", "Critical coupling by bisection", prhf::run_critical},
      {"checks", "Inequality, heuristic and conservation checks", prhf::run_checks},
      {"initdata", "Build and save initial data", prhf::run_initdata},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--output", output, "Output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "Seed override for randomized data");
    if (std::string(c.name) == "evolve") {
      sub->add_option("--resume", resume, "Continue from a snapshot");
      sub->add_flag("--override-header", cli.override_header, "Accept a snapshot whose header differs from the config");
    }
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    if (subs[i]->count("--output")) cli.output = output;
    if (subs[i]->count("--seed")) cli.seed = seed;
    if (subs[i]->get_option_no_throw("--resume") && subs[i]->count("--resume")) cli.resume = resume;
    try {
      const prhf::RunConfig cfg = prhf::load_config(config_path);
      return commands[i].fn(cfg, cli);
    } catch (const prhf::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}
