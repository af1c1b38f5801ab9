// dcpf: run, compare and benchmark distributed projection-free dynamics.

#include <CLI11.hpp>

#include "dcpf/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed projection-free (Frank-Wolfe) dynamics: simulation and benchmarks"};
  app.require_subcommand(1);

  std::string config;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--output-dir", output_dir, "Directory for CSV output");
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_flag("--quiet", quiet, "Suppress the summary");
  };
  auto* run = app.add_subcommand("run", "Run one algorithm and write its metric CSV");
  auto* compare = app.add_subcommand("compare", "Run several algorithms on one instance");
  auto* bench = app.add_subcommand("bench", "Time LMO and projection subproblems");
  for (auto* sub : {run, compare, bench}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dcpf::kExitConfig;
  }

  dcpf::HarnessOptions opts;
  opts.output_dir = output_dir;
  opts.seed = seed;
  opts.quiet = quiet;
  if (*run) return dcpf::run(config, opts);
  if (*compare) return dcpf::compare(config, opts);
  return dcpf::bench(config, opts);
}
