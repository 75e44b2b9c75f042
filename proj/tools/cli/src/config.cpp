#include "malin/cli/config.hpp"

#include "malin/estimates.hpp"
#include "malin/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace malin::cli {

namespace {

const std::vector<std::pair<Kind, std::string>>& kind_names() {
  static const std::vector<std::pair<Kind, std::string>> names = {
      {Kind::Geometry, "geometry"},       {Kind::Solve, "solve"},   {Kind::Harnack, "harnack"},
      {Kind::Hoelder, "hoelder"},         {Kind::Moser, "moser"},   {Kind::Sobolev, "sobolev"},
      {Kind::GlobalLinf, "global-linf"},  {Kind::InteriorL2, "interior-l2"}, {Kind::Sweep, "sweep"}};
  return names;
}

const std::set<std::string> kFamilies = {"Quadratic", "AnisotropicQuadratic", "PerturbedQuadratic", "RadialPower"};

std::string join(const std::string& path, const std::string& key) { return path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void only_keys(const nlohmann::json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw SchemaError(join(path, key), "unknown field");
  }
}

double number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
  return v;
}

double positive(const nlohmann::json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) throw SchemaError(path, "must be positive");
  return v;
}

long long integer(const nlohmann::json& j, const std::string& path, long long lo, long long hi) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  const long long v = j.get<long long>();
  if (v < lo || v > hi) {
    throw SchemaError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

std::string string(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const nlohmann::json& j, const std::string& path, std::size_t size = 0) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  if (size && j.size() != size) throw SchemaError(path, "expected " + std::to_string(size) + " entries");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], index(path, i)));
  return out;
}

Expression expression(const nlohmann::json& j, const std::string& path, int n) {
  if (j.is_number()) return Expression::constant(number(j, path), n);
  if (!j.is_string()) throw SchemaError(path, "expected a number or an expression string");
  try {
    return Expression::parse(j.get<std::string>(), n);
  } catch (const ExpressionError& e) {
    throw SchemaError(path, e.what());
  }
}

std::vector<Expression> vector_field(const nlohmann::json& j, const std::string& path, int n) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of " + std::to_string(n) + " expressions");
  if (j.size() != static_cast<std::size_t>(n)) throw SchemaError(path, "expected " + std::to_string(n) + " entries");
  std::vector<Expression> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(expression(j[i], index(path, i), n));
  return out;
}

PotentialConfig parse_potential(const nlohmann::json& j, const std::string& path) {
  only_keys(j, path, {"family", "n", "params", "label"});
  PotentialConfig p;
  if (!j.contains("family")) throw SchemaError(join(path, "family"), "required");
  p.family = string(j["family"], join(path, "family"));
  if (!kFamilies.count(p.family)) {
    throw SchemaError(join(path, "family"),
                      "expected one of Quadratic, AnisotropicQuadratic, PerturbedQuadratic, RadialPower");
  }
  if (j.contains("n")) p.n = static_cast<int>(integer(j["n"], join(path, "n"), 2, 3));
  if (j.contains("label")) p.label = string(j["label"], join(path, "label"));
  const std::string pp = join(path, "params");
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  if (p.family == "Quadratic") only_keys(params, pp, {});
  if (p.family == "AnisotropicQuadratic") only_keys(params, pp, {"axes"});
  if (p.family == "PerturbedQuadratic") only_keys(params, pp, {"amplitude", "frequency", "domain"});
  if (p.family == "RadialPower") only_keys(params, pp, {"exponent", "domain"});

  if (p.family == "AnisotropicQuadratic") {
    if (!params.contains("axes")) throw SchemaError(join(pp, "axes"), "required for AnisotropicQuadratic");
    p.axes = numbers(params["axes"], join(pp, "axes"));
    if (p.axes.size() < 2 || p.axes.size() > 3) throw SchemaError(join(pp, "axes"), "expected 2 or 3 entries");
    if (j.contains("n") && static_cast<int>(p.axes.size()) != p.n) {
      throw SchemaError(join(pp, "axes"), "length must equal n");
    }
    p.n = static_cast<int>(p.axes.size());
    for (std::size_t i = 0; i < p.axes.size(); ++i) {
      if (!(p.axes[i] > 0)) throw SchemaError(index(join(pp, "axes"), i), "must be positive");
    }
  }
  if (p.family == "PerturbedQuadratic") {
    if (!params.contains("amplitude")) throw SchemaError(join(pp, "amplitude"), "required for PerturbedQuadratic");
    p.amplitude = number(params["amplitude"], join(pp, "amplitude"));
    p.frequency = params.contains("frequency") ? numbers(params["frequency"], join(pp, "frequency"), p.n)
                                               : std::vector<double>(p.n, 1.0);
  }
  if (p.family == "RadialPower") {
    p.exponent = params.contains("exponent") ? number(params["exponent"], join(pp, "exponent")) : 3.0;
    if (!(p.exponent > 1.0)) throw SchemaError(join(pp, "exponent"), "must exceed 1");
  }
  if (params.contains("domain")) {
    const std::string dp = join(pp, "domain");
    only_keys(params["domain"], dp, {"lower", "upper"});
    if (!params["domain"].contains("lower") || !params["domain"].contains("upper")) {
      throw SchemaError(dp, "needs lower and upper");
    }
    const auto lo = numbers(params["domain"]["lower"], join(dp, "lower"), p.n);
    const auto hi = numbers(params["domain"]["upper"], join(dp, "upper"), p.n);
    for (int i = 0; i < p.n; ++i) {
      if (!(lo[i] < hi[i])) throw SchemaError(index(join(dp, "upper"), i), "must exceed lower");
    }
    p.domain = Box{from_std(lo), from_std(hi)};
  }
  return p;
}

DataConfig parse_data(const nlohmann::json& j, const std::string& path, int n) {
  only_keys(j, path, {"b", "B", "F", "f", "g", "exact", "divB"});
  DataConfig d;
  if (j.contains("b")) d.b = vector_field(j["b"], join(path, "b"), n);
  if (j.contains("B")) d.B = vector_field(j["B"], join(path, "B"), n);
  if (j.contains("F")) d.F = vector_field(j["F"], join(path, "F"), n);
  if (j.contains("f")) d.f = expression(j["f"], join(path, "f"), n);
  if (j.contains("exact")) d.exact = expression(j["exact"], join(path, "exact"), n);
  if (j.contains("g")) {
    const auto& g = j["g"];
    const std::string gp = join(path, "g");
    if (g.is_object()) {
      only_keys(g, gp, {"random"});
      if (!g.contains("random")) throw SchemaError(gp, "expected an expression or {\"random\": {...}}");
      only_keys(g["random"], join(gp, "random"), {"degree", "margin"});
      RandomData r;
      if (g["random"].contains("degree")) {
        r.degree = static_cast<int>(integer(g["random"]["degree"], join(join(gp, "random"), "degree"), 1, 16));
      }
      if (g["random"].contains("margin")) {
        r.margin = positive(g["random"]["margin"], join(join(gp, "random"), "margin"));
      }
      d.random_g = r;
    } else {
      d.g = expression(g, gp, n);
    }
  }
  if (j.contains("divB")) {
    d.divB = string(j["divB"], join(path, "divB"));
    if (d.divB != "sampled" && d.divB != "analytic" && d.divB != "unknown") {
      throw SchemaError(join(path, "divB"), "expected one of sampled, analytic, unknown");
    }
  }
  return d;
}

void check_dyadic(const std::vector<double>& s, const std::string& path) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0)) throw SchemaError(index(path, i), "must be positive");
    if (i > 0) {
      const double q = s[i] / s[i - 1];
      if (!(std::abs(q - 0.5) < 1e-9 || std::abs(q - 2.0) < 1e-9)) {
        throw SchemaError(index(path, i), "scales must form a dyadic sequence");
      }
    }
  }
}

const std::set<std::string> kTopLevel = {"$schema", "kind",    "name",  "potential", "center", "data",
                                         "scales",  "mesh",    "seed",  "repeats",   "output", "t_ratio",
                                         "depth",   "q",       "r",     "alpha",     "pairs",  "random_members",
                                         "assert",  "experiments"};

ExperimentConfig parse_member(const nlohmann::json& j, const std::string& path, bool nested) {
  only_keys(j, path, kTopLevel);
  ExperimentConfig c;
  c.source = j;
  if (!j.contains("kind")) throw SchemaError(join(path, "kind"), "required");
  const auto kind = kind_from_string(string(j["kind"], join(path, "kind")));
  if (!kind) {
    throw SchemaError(join(path, "kind"),
                      "expected one of geometry, solve, harnack, hoelder, moser, sobolev, global-linf, "
                      "interior-l2, sweep");
  }
  c.kind = *kind;
  if (j.contains("name")) c.name = string(j["name"], join(path, "name"));
  if (j.contains("seed")) {
    c.seed = static_cast<std::uint64_t>(integer(j["seed"], join(path, "seed"), 0, (1LL << 53)));
  }
  if (j.contains("output")) c.output = string(j["output"], join(path, "output"));

  if (c.kind == Kind::Sweep) {
    if (nested) throw SchemaError(join(path, "kind"), "sweeps cannot be nested");
    if (!j.contains("experiments") || !j["experiments"].is_array() || j["experiments"].empty()) {
      throw SchemaError(join(path, "experiments"), "a sweep needs a nonempty array of experiments");
    }
    nlohmann::json base = j;
    base.erase("experiments");
    base.erase("kind");
    base.erase("name");
    for (std::size_t i = 0; i < j["experiments"].size(); ++i) {
      const std::string mp = index(join(path, "experiments"), i);
      if (!j["experiments"][i].is_object()) throw SchemaError(mp, "expected an object");
      nlohmann::json merged = base;
      merged.merge_patch(j["experiments"][i]);
      c.experiments.push_back(parse_member(merged, mp, true));
    }
    return c;
  }
  if (j.contains("experiments")) throw SchemaError(join(path, "experiments"), "only valid for sweeps");

  if (!j.contains("potential")) throw SchemaError(join(path, "potential"), "required");
  c.potential = parse_potential(j["potential"], join(path, "potential"));
  const int n = c.potential.n;
  if (j.contains("center")) c.center = numbers(j["center"], join(path, "center"), n);
  if (j.contains("data")) c.data = parse_data(j["data"], join(path, "data"), n);
  if (!j.contains("scales")) throw SchemaError(join(path, "scales"), "required");
  c.scales = numbers(j["scales"], join(path, "scales"));
  if (c.scales.empty()) throw SchemaError(join(path, "scales"), "needs at least one scale");
  check_dyadic(c.scales, join(path, "scales"));
  if (j.contains("mesh")) {
    const std::string mp = join(path, "mesh");
    only_keys(j["mesh"], mp, {"relative_size", "refinements", "resolution"});
    const auto& m = j["mesh"];
    if (m.contains("relative_size")) {
      c.mesh.relative_size = positive(m["relative_size"], join(mp, "relative_size"));
      if (c.mesh.relative_size > 1.0) throw SchemaError(join(mp, "relative_size"), "must not exceed 1");
    }
    if (m.contains("refinements")) {
      c.mesh.refinements = static_cast<int>(integer(m["refinements"], join(mp, "refinements"), 0, 4));
    }
    if (m.contains("resolution")) {
      c.mesh.resolution = static_cast<int>(integer(m["resolution"], join(mp, "resolution"), 16, 8192));
    }
  }
  if (j.contains("repeats")) c.repeats = static_cast<int>(integer(j["repeats"], join(path, "repeats"), 1, 100000));
  if (j.contains("t_ratio")) {
    c.t_ratio = positive(j["t_ratio"], join(path, "t_ratio"));
    if (c.t_ratio > 0.5) throw SchemaError(join(path, "t_ratio"), "must not exceed 1/2");
  }
  if (j.contains("depth")) c.depth = static_cast<int>(integer(j["depth"], join(path, "depth"), 0, 8));
  if (j.contains("q")) c.q = positive(j["q"], join(path, "q"));
  if (j.contains("r")) {
    c.r = number(j["r"], join(path, "r"));
    if (c.r < 0) throw SchemaError(join(path, "r"), "must be nonnegative");
  }
  if (j.contains("alpha")) c.alpha = positive(j["alpha"], join(path, "alpha"));
  if (j.contains("pairs")) c.pairs = static_cast<int>(integer(j["pairs"], join(path, "pairs"), 1, 100000));
  if (j.contains("random_members")) {
    c.random_members = static_cast<int>(integer(j["random_members"], join(path, "random_members"), 0, 1000));
  }
  if (j.contains("assert")) {
    const std::string ap = join(path, "assert");
    only_keys(j["assert"], ap, {"max_quotient", "max_band", "ratio", "min_gamma"});
    const auto& a = j["assert"];
    if (a.contains("max_quotient")) c.checks.max_quotient = positive(a["max_quotient"], join(ap, "max_quotient"));
    if (a.contains("max_band")) c.checks.max_band = positive(a["max_band"], join(ap, "max_band"));
    if (a.contains("min_gamma")) c.checks.min_gamma = number(a["min_gamma"], join(ap, "min_gamma"));
    if (a.contains("ratio")) {
      const std::string rp = join(ap, "ratio");
      only_keys(a["ratio"], rp, {"value", "tolerance"});
      if (!a["ratio"].contains("value")) throw SchemaError(join(rp, "value"), "required");
      c.checks.ratio_value = number(a["ratio"]["value"], join(rp, "value"));
      if (a["ratio"].contains("tolerance")) {
        c.checks.ratio_tolerance = positive(a["ratio"]["tolerance"], join(rp, "tolerance"));
      }
    }
  }
  return c;
}

}  // namespace

std::string to_string(Kind kind) {
  for (const auto& [k, name] : kind_names()) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<Kind> kind_from_string(const std::string& name) {
  for (const auto& [k, s] : kind_names()) {
    if (s == name) return k;
  }
  return std::nullopt;
}

ExperimentConfig parse_config(const nlohmann::json& j) { return parse_member(j, "$", false); }

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError("$", "cannot read " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

PotentialPtr make_potential(const PotentialConfig& c) {
  if (c.family == "Quadratic") return PotentialSpec::quadratic(c.n, c.label).share();
  if (c.family == "AnisotropicQuadratic") return PotentialSpec::anisotropic(from_std(c.axes), c.label).share();
  if (c.family == "PerturbedQuadratic") {
    return PotentialSpec::perturbed(c.n, c.amplitude, from_std(c.frequency), c.domain, c.label).share();
  }
  return PotentialSpec::radial_power(c.n, c.exponent, c.domain, c.label).share();
}

Vector default_center(const ExperimentConfig& config, const PotentialPtr& potential) {
  if (!config.center.empty()) return from_std(config.center);
  const auto* spec = dynamic_cast<const PotentialSpec*>(potential.get());
  if (spec) return (spec->domain().lower + spec->domain().upper) / 2.0;
  return Vector::Zero(potential->dimension());
}

ProblemData make_problem(const DataConfig& c, const PotentialPtr& potential, const Vector& center,
                         std::uint64_t seed) {
  ProblemData d(potential);
  auto field = [](const std::vector<Expression>& e) -> VectorField {
    if (e.empty()) return {};
    return [e](const Vector& x) {
      Vector v(static_cast<Eigen::Index>(e.size()));
      for (std::size_t i = 0; i < e.size(); ++i) v[static_cast<Eigen::Index>(i)] = e[i](x);
      return v;
    };
  };
  d.drift_b = field(c.b);
  d.drift_B = field(c.B);
  d.flux_F = field(c.F);
  if (c.f) d.source_f = [e = *c.f](const Vector& x) { return e(x); };
  if (c.g) {
    d.boundary_g = [e = *c.g](const Vector& x) { return e(x); };
  } else if (c.random_g) {
    d.boundary_g = RandomBoundaryData(potential->dimension(), seed, center, c.random_g->degree, c.random_g->margin)
                       .field();
  }
  if (!c.B.empty()) {
    d.div_B = [e = c.B](const Vector& x) {
      double s = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) s += e[i].derivative(x, static_cast<int>(i));
      return s;
    };
  }
  if (c.divB == "analytic") d.divB_certificate = DivergenceCertificate::analytic();
  else if (c.divB == "unknown") d.divB_certificate = DivergenceCertificate::unknown();
  else d.divB_certificate = DivergenceCertificate::sampled(1e-10);
  return d;
}

std::uint64_t config_hash(const nlohmann::json& j) { return fnv1a(j.dump()); }

}  // namespace malin::cli
