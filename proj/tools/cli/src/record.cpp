#include "malin/cli/record.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace malin::cli {

namespace {

double get(const nlohmann::json& m, const std::string& key) {
  if (!m.contains(key) || !m[key].is_number()) return std::numeric_limits<double>::quiet_NaN();
  return m[key].get<double>();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const std::map<std::string, std::pair<std::string, std::string>>& metrics() {
  // kind -> (primary metric, CSV header)
  static const std::map<std::string, std::pair<std::string, std::string>> m = {
      {"geometry", {"ratio", "family,h,volume,ratio,inner_r,outer_r"}},
      {"solve", {"residual", "family,h,seed,nodes,h_mesh,residual,condition,l2_error,max_peclet"}},
      {"harnack", {"quotient", "family,h,t,seed,sup,inf,quotient,data_term,h_mesh"}},
      {"hoelder", {"gamma_osc", "family,seed,h,sup,inf,osc,gamma_osc,beta"}},
      {"moser", {"terminal_ratio", "family,h,seed,k,terminal_ratio,interpolation_margin,log_l2_w"}},
      {"sobolev", {"max_ratio", "family,h,p,max_ratio"}},
      {"global-linf", {"gamma_fit", "family,h,linf,data_norm,ratio,gamma_fit"}},
      {"interior-l2", {"band", "family,seed,h,sup_half,l2,bracket,ratio"}},
  };
  return m;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool Record::passed() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

nlohmann::json Record::to_json() const {
  nlohmann::json j = report.to_json();
  j["index"] = index;
  j["seed"] = seed;
  j["name"] = name;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}});
  }
  return j;
}

Record Record::from_json(const nlohmann::json& j) {
  Record r;
  r.report = EstimateReport::from_json(j);
  r.index = j.at("index").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.name = j.value("name", "");
  for (const auto& c : j.at("checks")) {
    r.checks.push_back(Check{c.at("name").get<std::string>(), c.at("pass").get<bool>(), c.at("value").get<double>(),
                             c.at("limit").get<double>()});
  }
  return r;
}

bool operator==(const Record& a, const Record& b) { return a.to_json() == b.to_json(); }

std::string Record::csv_header(const std::string& kind) {
  const auto it = metrics().find(kind);
  return it == metrics().end() ? "family" : it->second.second;
}

std::vector<std::string> Record::csv_rows() const {
  const nlohmann::json& m = report.measured;
  const std::string& kind = report.kind;
  const std::string fam = csv_escape(report.family);
  const std::string seed_s = std::to_string(seed);
  auto row = [&](std::initializer_list<std::string> cells) {
    std::string s = fam;
    for (const auto& c : cells) s += "," + c;
    return s;
  };
  auto num = [&](const nlohmann::json& obj, const char* key) { return format_number(get(obj, key)); };
  std::vector<std::string> out;
  if (kind == "geometry") {
    out.push_back(row({num(m, "h"), num(m, "volume"), num(m, "ratio"), num(m, "inner_r"), num(m, "outer_r")}));
  } else if (kind == "solve") {
    out.push_back(row({num(m, "h"), seed_s, num(m, "nodes"), num(m, "h_mesh"), num(m, "residual"),
                       num(m, "condition"), num(m, "l2_error"), num(m, "max_peclet")}));
  } else if (kind == "harnack") {
    out.push_back(row({num(m, "h"), num(m, "t"), seed_s, num(m, "sup"), num(m, "inf"), num(m, "quotient"),
                       num(m, "data_term"), num(m, "h_mesh")}));
  } else if (kind == "hoelder") {
    const auto& tr = m.at("trace");
    for (std::size_t i = 0; i < tr.at("heights").size(); ++i) {
      out.push_back(row({seed_s, format_number(tr["heights"][i].get<double>()),
                         format_number(tr["sup"][i].get<double>()), format_number(tr["inf"][i].get<double>()),
                         format_number(tr["osc"][i].get<double>()), num(m, "gamma_osc"), num(m, "beta")}));
    }
  } else if (kind == "moser") {
    out.push_back(row({num(m, "h"), seed_s, num(m, "k"), num(m, "terminal_ratio"), num(m, "interpolation_margin"),
                       num(m, "log_l2_w")}));
  } else if (kind == "sobolev") {
    out.push_back(row({num(m, "h"), num(m, "p"), num(m, "max_ratio")}));
  } else if (kind == "global-linf") {
    for (const auto& r : m.at("rows")) {
      out.push_back(row({num(r, "h"), num(r, "linf"), num(r, "data_norm"), num(r, "ratio"), num(m, "gamma_fit")}));
    }
  } else if (kind == "interior-l2") {
    for (const auto& r : m.at("rows")) {
      out.push_back(row({seed_s, num(r, "h"), num(r, "sup_half"), num(r, "l2"), num(r, "bracket"), num(r, "ratio")}));
    }
  }
  return out;
}

std::string Record::primary_metric() const {
  const auto it = metrics().find(report.kind);
  return it == metrics().end() ? "" : it->second.first;
}

double Record::primary_value() const { return get(report.measured, primary_metric()); }

}  // namespace malin::cli
