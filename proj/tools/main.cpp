#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"polarset: Evans and Choquet measure constructions on finite samples"};
  app.require_subcommand(1);

  polarset::cli::RunOptions opts;
  int depth = 0;
  std::uint64_t seed = 0;

  for (const char* name : {"check-triangle", "metric", "capacity", "sweep", "evans", "choquet", "glue", "audit"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--scenario", opts.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory")->capture_default_str();
    sub->add_option("--depth", depth, "truncation depth M (overrides the scenario)");
    sub->add_option("--seed", seed, "seed for randomized inputs (overrides the scenario)");
    sub->add_option("--threads", opts.threads, "worker threads")->capture_default_str();
    if (std::string(name) == "audit") {
      sub->add_option("--measure", opts.measure, "measure CSV to re-verify");
      sub->add_option("--kind", opts.kind, "sweep, capacity, evans or choquet");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : polarset::cli::kInputError;
  }

  auto* sub = app.get_subcommands().front();
  opts.command = sub->get_name();
  if (sub->count("--depth")) opts.depth = depth;
  if (sub->count("--seed")) opts.seed = seed;
  return polarset::cli::run(opts, std::cout);
}
