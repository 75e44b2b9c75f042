#include "malin/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

namespace malin::cli {

namespace {

std::string cell(const nlohmann::json& m, const char* key) {
  if (!m.contains(key)) return "-";
  const auto& v = m[key];
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  if (v.is_string()) return v.get<std::string>();
  return "-";
}

// Columns shown per kind besides family, label, seed and checks.
const std::map<std::string, std::vector<const char*>>& columns() {
  static const std::map<std::string, std::vector<const char*>> c = {
      {"geometry", {"h", "volume", "ratio", "inner_r", "outer_r"}},
      {"solve", {"h", "nodes", "h_mesh", "residual", "condition", "l2_error"}},
      {"harnack", {"h", "t", "sup", "inf", "quotient", "data_term"}},
      {"hoelder", {"h0", "gamma_osc", "beta", "hoelder_constant"}},
      {"moser", {"h", "k", "terminal_ratio", "interpolation_margin", "log_l2_w"}},
      {"sobolev", {"h", "p", "max_ratio"}},
      {"global-linf", {"gamma_fit", "constant"}},
      {"interior-l2", {"band"}},
  };
  return c;
}

void print_table(const std::vector<std::vector<std::string>>& rows, std::ostream& out) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    out << line << '\n';
  }
}

}  // namespace

std::vector<LoadedRecord> load_records(const std::filesystem::path& dir, std::vector<std::string>* skipped) {
  std::vector<LoadedRecord> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      std::ifstream in(f);
      const nlohmann::json j = nlohmann::json::parse(in);
      out.push_back(LoadedRecord{f.filename().string(), Record::from_json(j)});
    } catch (const std::exception&) {
      if (skipped) skipped->push_back(f.filename().string());
    }
  }
  return out;
}

void write_summary(const std::vector<LoadedRecord>& records, std::ostream& out) {
  std::map<std::string, std::vector<const LoadedRecord*>> by_kind;
  for (const auto& r : records) by_kind[r.record.report.kind].push_back(&r);

  std::size_t total_failed = 0;
  for (const auto& [kind, group] : by_kind) {
    out << "== " << kind << " (" << group.size() << (group.size() == 1 ? " record" : " records") << ") ==\n";
    const auto it = columns().find(kind);
    const std::vector<const char*> cols = it == columns().end() ? std::vector<const char*>{} : it->second;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"label", "seed"};
    for (const char* c : cols) header.emplace_back(c);
    header.emplace_back("checks");
    rows.push_back(header);
    // Bands of the headline metric per (label, seed).
    std::map<std::string, std::vector<double>> bands;
    for (const LoadedRecord* lr : group) {
      const Record& r = lr->record;
      std::vector<std::string> row = {r.report.label, std::to_string(r.seed)};
      for (const char* c : cols) row.push_back(cell(r.report.measured, c));
      std::size_t failed = 0;
      for (const auto& c : r.checks) failed += c.pass ? 0 : 1;
      total_failed += failed;
      row.push_back(failed ? "FAIL(" + std::to_string(failed) + ")" : "pass");
      rows.push_back(row);
      const double v = r.primary_value();
      if (std::isfinite(v)) bands[r.report.label].push_back(v);
    }
    print_table(rows, out);
    const std::string metric = group.front()->record.primary_metric();
    for (const auto& [label, values] : bands) {
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      out << "  " << label << ": " << metric << " in [" << format_number(*lo) << ", " << format_number(*hi) << "]";
      if (*lo > 0) out << ", band " << format_number(*hi / *lo);
      out << '\n';
    }
    out << '\n';
  }
  out << records.size() << " records, " << total_failed << " failed checks\n";
}

void write_digest_csv(const std::vector<LoadedRecord>& records, std::ostream& out) {
  out << "file,kind,family,label,index,seed,scale,metric,value,checks_passed,checks_total\n";
  for (const auto& lr : records) {
    const Record& r = lr.record;
    std::size_t passed = 0;
    for (const auto& c : r.checks) passed += c.pass ? 1 : 0;
    out << lr.file << ',' << r.report.kind << ',' << r.report.family << ',' << r.report.label << ',' << r.index
        << ',' << r.seed << ',' << format_number(r.report.scales.empty() ? 0.0 : r.report.scales.front()) << ','
        << r.primary_metric() << ',' << format_number(r.primary_value()) << ',' << passed << ','
        << r.checks.size() << '\n';
  }
}

int report(const std::filesystem::path& dir, bool csv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> skipped;
  const auto records = load_records(dir, &skipped);
  for (const auto& s : skipped) err << "skipping " << s << ": not a result record\n";
  if (records.empty()) {
    err << "no result records in " << dir.string() << '\n';
    return 1;
  }
  if (csv) {
    write_digest_csv(records, out);
  } else {
    write_summary(records, out);
  }
  return 0;
}

}  // namespace malin::cli
