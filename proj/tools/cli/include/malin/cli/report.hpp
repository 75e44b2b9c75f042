#pragma once

#include "malin/cli/record.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace malin::cli {

struct LoadedRecord {
  std::string file;  // file name within the directory
  Record record;
};

// Every *.json record in the directory, sorted by file name. Files that are
// not records are skipped and listed in `skipped`.
std::vector<LoadedRecord> load_records(const std::filesystem::path& dir, std::vector<std::string>* skipped = nullptr);

// Per-kind tables with bands, fitted exponents and check status.
void write_summary(const std::vector<LoadedRecord>& records, std::ostream& out);

// One row per record:
// file,kind,family,label,index,seed,scale,metric,value,checks_passed,checks_total
void write_digest_csv(const std::vector<LoadedRecord>& records, std::ostream& out);

// Returns 1 (and prints a message to `err`) when the directory holds no records.
int report(const std::filesystem::path& dir, bool csv, std::ostream& out, std::ostream& err);

}  // namespace malin::cli
