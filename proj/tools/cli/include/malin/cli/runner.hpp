#pragma once

#include "malin/cli/config.hpp"
#include "malin/cli/record.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace malin::cli {

// Process exit statuses.
enum ExitCode : int {
  kOk = 0,
  kAssertionFailed = 1,
  kSchemaError = 2,
  kHypothesisError = 3,
  kNumericalError = 4,
};

struct Task {
  std::size_t index = 0;
  const ExperimentConfig* config = nullptr;
  std::vector<double> scales;  // one scale, or the full list for table kinds
  std::uint64_t seed = 0;
};

// Tasks in deterministic order: members, then scales, then seeds.
std::vector<Task> plan(const ExperimentConfig& config);

// Runs one task; throws the library's errors unchanged.
Record execute(const Task& task);

struct RunOptions {
  unsigned workers = 0;  // 0: available parallelism
  bool assert_mode = false;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed_override;
  std::string timestamp;  // empty: current UTC time
  std::ostream* log = nullptr;
};

struct RunSummary {
  int exit_code = kOk;
  std::size_t records = 0;
  std::size_t failed_checks = 0;
  std::vector<std::filesystem::path> files;
  std::string error;
};

void apply_seed(ExperimentConfig& config, std::uint64_t seed);

RunSummary run(const ExperimentConfig& config, const RunOptions& options);
// Loads, validates and runs; schema problems become exit code 2.
RunSummary run_file(const std::filesystem::path& config_file, const RunOptions& options);

// "{kind}_{family}_{timestamp}_{index}.json"
std::string record_file_name(const Record& record, const std::string& timestamp);

}  // namespace malin::cli
