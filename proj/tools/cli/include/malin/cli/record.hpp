#pragma once

#include "malin/estimates.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace malin::cli {

struct Check {
  std::string name;
  bool pass = true;
  double value = 0.0;
  double limit = 0.0;
};

// One experiment task's output: the estimate report plus bookkeeping.
struct Record {
  EstimateReport report;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::string name;
  std::vector<Check> checks;

  bool passed() const;
  nlohmann::json to_json() const;
  static Record from_json(const nlohmann::json& j);

  // Summary CSV for the record's kind; rows may be several for table kinds.
  static std::string csv_header(const std::string& kind);
  std::vector<std::string> csv_rows() const;
  // Headline number shown in reports and the digest CSV.
  std::string primary_metric() const;
  double primary_value() const;
};

bool operator==(const Record& a, const Record& b);

std::string format_number(double v);

}  // namespace malin::cli
