#include "malin/cli/report.hpp"
#include "malin/cli/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"malin: linearized Monge-Ampere estimate experiments"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned workers = 0;
  bool assert_mode = false;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run the experiments of a config file");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--workers", workers, "Worker threads (default: available parallelism)");
  run->add_flag("--assert", assert_mode, "Exit 1 when any check fails");
  run->add_option("--out", out_dir, "Output directory (overrides the config)");

  std::string report_dir;
  bool csv = false;
  auto* rep = app.add_subcommand("report", "Summarize a result directory");
  rep->add_option("dir", report_dir, "Result directory")->required();
  rep->add_flag("--csv", csv, "Print a one-row-per-record CSV digest instead of tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : malin::cli::kSchemaError;
  }

  if (*run) {
    malin::cli::RunOptions options;
    options.workers = workers;
    options.assert_mode = assert_mode;
    if (!out_dir.empty()) options.out_dir = out_dir;
    options.log = &std::cout;
    if (const char* seed = std::getenv("MALIN_SEED")) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(seed, &end, 10);
      if (end == seed || *end != '\0') {
        std::cerr << "MALIN_SEED must be a nonnegative integer\n";
        return malin::cli::kSchemaError;
      }
      options.seed_override = v;
    }
    const malin::cli::RunSummary summary = malin::cli::run_file(config_path, options);
    if (!summary.error.empty()) std::cerr << summary.error << '\n';
    return summary.exit_code;
  }
  return malin::cli::report(report_dir, csv, std::cout, std::cerr);
}
