#include "malin/estimates.hpp"

#include "malin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace malin {

MoserSchedule moser_schedule(double q, int n) {
  if (n < 2) throw ContractError("dimension must be at least 2");
  if (!(q > 0.5 * n)) {
    std::ostringstream os;
    os << "integrability exponent q = " << q << " must exceed n/2 = " << 0.5 * n;
    throw HypothesisError(os.str());
  }
  MoserSchedule s;
  s.n = n;
  s.q = q;
  s.q_hat = 2.0 * q / (q - 1.0);
  s.n_hat = n >= 3 ? 2.0 * n / (n - 2.0) : 2.0 * s.q_hat;
  s.chi = s.n_hat / s.q_hat;
  return s;
}

double MoserSchedule::exponent(int m) const { return std::pow(chi, m) * q_hat; }

std::vector<double> MoserSchedule::exponents(int depth) const {
  std::vector<double> out;
  double g = q_hat;
  for (int m = 0; m <= depth; ++m) {
    out.push_back(g);
    g *= chi;
  }
  return out;
}

double gamma_formula(int n, double r, double alpha) {
  if (!(r > 0.5 * n)) {
    std::ostringstream os;
    os << "norm exponent r = " << r << " must exceed n/2 = " << 0.5 * n;
    throw HypothesisError(os.str());
  }
  if (!(alpha > 0.0)) throw ContractError("alpha must be positive");
  return std::min(1.0 - n / (2.0 * r), alpha / (1.0 + alpha));
}

// ---- random data -------------------------------------------------------

namespace {

// Uniform in [0, 1) from the top 53 bits, identical on every platform.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace

RandomBoundaryData::RandomBoundaryData(int n, std::uint64_t seed, const Vector& center, int degree, double margin)
    : n_(n), center_(center) {
  if (center.size() != n) throw ContractError("center dimension differs from n");
  if (degree < 1) throw ContractError("degree must be at least 1");
  std::mt19937_64 rng(seed);
  for (int k = 1; k <= degree; ++k) {
    a_.push_back(uniform(rng, -1.0, 1.0) / k);
    b_.push_back(uniform(rng, -1.0, 1.0) / k);
    if (n_ == 3) {
      Vector w(3);
      for (int i = 0; i < 3; ++i) w[i] = uniform(rng, -1.0, 1.0);
      if (w.norm() < 1e-3) w = Vector::Unit(3, 0);
      omega_.push_back(static_cast<double>(k) * w.normalized());
      phase_.push_back(uniform(rng, 0.0, 2.0 * std::numbers::pi));
    }
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& d : sphere_directions(n_, n_ == 2 ? 4096 : 4000)) {
    const double v = raw(d);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  offset_ = -lo + margin * std::max(hi - lo, 1e-12);
}

double RandomBoundaryData::raw(const Vector& d) const {
  double v = 0.0;
  if (n_ == 2) {
    const double theta = std::atan2(d[1], d[0]);
    for (std::size_t k = 0; k < a_.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      v += a_[k] * std::cos(kk * theta) + b_[k] * std::sin(kk * theta);
    }
  } else {
    for (std::size_t k = 0; k < a_.size(); ++k) v += a_[k] * std::sin(omega_[k].dot(d) + phase_[k]);
  }
  return v;
}

double RandomBoundaryData::operator()(const Vector& x) const {
  const Vector d = x - center_;
  const double r = d.norm();
  if (r == 0.0) return offset_;
  return offset_ + raw(d / r);
}

double RandomBoundaryData::harmonic_extension(const Vector& x, double radius) const {
  if (n_ != 2) throw ContractError("harmonic extension is available for n = 2 only");
  const Vector d = x - center_;
  const double rho = d.norm() / radius;
  const double theta = std::atan2(d[1], d[0]);
  double v = offset_;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    v += std::pow(rho, kk) * (a_[k] * std::cos(kk * theta) + b_[k] * std::sin(kk * theta));
  }
  return v;
}

ScalarField RandomBoundaryData::field() const {
  return [self = *this](const Vector& x) { return self(x); };
}

// ---- section solves ------------------------------------------------------

MeshPtr mesh_section(const SectionSpec& spec, const SectionMeshOptions& opt) {
  const int n = spec.potential->dimension();
  const int res = opt.resolution > 0 ? opt.resolution : (n == 2 ? 256 : 400);
  auto body = std::make_shared<const Polytope>(extract_section(spec, res));
  const double inradius = body->boundary_distance(spec.center);
  Mesh mesh = triangulate(body, opt.relative_size * inradius);
  for (int i = 0; i < opt.refinements; ++i) mesh = refine(mesh);
  return std::make_shared<const Mesh>(std::move(mesh));
}

SectionSolve solve_on_section(const SectionSpec& spec, const ProblemData& data, const SectionMeshOptions& opt,
                              const SolveOptions& solve) {
  MeshPtr mesh = mesh_section(spec, opt);
  SolveResult result = solve_dirichlet(mesh, data, solve);
  return SectionSolve{spec, std::move(mesh), std::move(result)};
}

Region section_region(const SectionLevel& level, double t) {
  return [level, t](const Vector& x) { return level.inside(x, t); };
}

SectionExtrema section_extrema(const DiscreteField& u, const PointLocator& locator, const SectionLevel& level,
                               double t, int samples) {
  const Mesh& mesh = u.mesh();
  const int n = mesh.dimension();
  if (samples <= 0) samples = n == 2 ? 256 : 400;
  SectionExtrema out;
  out.sup = -std::numeric_limits<double>::infinity();
  out.inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    if (!level.inside(mesh.node(i), t)) continue;
    out.sup = std::max(out.sup, u[i]);
    out.inf = std::min(out.inf, u[i]);
    ++out.nodes;
  }
  for (const auto& d : sphere_directions(n, samples)) {
    const double r = section_radius(level, t, d);
    const double v = locator.evaluate(u, level.center() + r * d);
    out.sup = std::max(out.sup, v);
    out.inf = std::min(out.inf, v);
    ++out.boundary_samples;
  }
  return out;
}

double data_norm(const Mesh& mesh, const ProblemData& data, double r, const Region& region) {
  double s = sup_norm(mesh, data.flux_F, region);
  if (data.source_f) s += lp_norm(mesh, data.source_f, r, region);
  return s;
}

// ---- reports -------------------------------------------------------------

namespace {

bool all_finite(const nlohmann::json& j, std::string& path) {
  if (j.is_number()) return std::isfinite(j.get<double>());
  if (j.is_null()) return false;
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!all_finite(it.value(), path)) {
        path = it.key() + (path.empty() ? "" : "." + path);
        return false;
      }
    }
  }
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!all_finite(j[i], path)) {
        path = "[" + std::to_string(i) + "]" + (path.empty() ? "" : "." + path);
        return false;
      }
    }
  }
  return true;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::uint64_t unhex(const std::string& s) { return std::stoull(s, nullptr, 16); }

}  // namespace

bool EstimateReport::valid(std::string* why) const {
  std::string path;
  if (!all_finite(measured, path)) {
    if (why) *why = "non-finite measured quantity at " + path;
    return false;
  }
  for (std::size_t i = 1; i < scales.size(); ++i) {
    const double q = scales[i] / scales[i - 1];
    if (!(std::abs(q - 2.0) < 1e-9 || std::abs(q - 0.5) < 1e-9)) {
      if (why) *why = "scale list is not dyadic";
      return false;
    }
  }
  return true;
}

nlohmann::json EstimateReport::to_json() const {
  return nlohmann::json{{"kind", kind},         {"label", label},
                        {"family", family},     {"scales", scales},
                        {"measured", measured}, {"mesh_hash", hex(mesh_hash)},
                        {"config_hash", hex(config_hash)}, {"notes", notes}};
}

EstimateReport EstimateReport::from_json(const nlohmann::json& j) {
  EstimateReport r;
  r.kind = j.at("kind").get<std::string>();
  r.label = j.value("label", std::string{});
  r.family = j.value("family", std::string{});
  r.scales = j.value("scales", std::vector<double>{});
  r.measured = j.value("measured", nlohmann::json::object());
  r.mesh_hash = unhex(j.value("mesh_hash", std::string("0")));
  r.config_hash = unhex(j.value("config_hash", std::string("0")));
  r.notes = j.value("notes", std::vector<std::string>{});
  return r;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ContractError("fit needs equally many x and y values");
  LineFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  const double nn = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= nn;
  my /= nn;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

// ---- Harnack ---------------------------------------------------------------

HarnackResult harnack_measure(const SectionSolve& solve, double t, const ProblemData& data, double r,
                              double gamma) {
  const SectionSpec& spec = solve.spec;
  if (!(t > 0.0) || t > 0.5 * spec.height * (1.0 + 1e-12)) {
    throw ContractError("inner height must satisfy 0 < t <= h/2");
  }
  const int n = spec.potential->dimension();
  if (r <= 0.0) r = n;
  if (gamma < 0.0) gamma = gamma_formula(n, r, 1.0);
  const SectionLevel level(spec.potential, spec.center);
  const PointLocator locator(solve.mesh);
  const SectionExtrema ex = section_extrema(solve.result.solution, locator, level, t);

  HarnackResult out;
  out.h = spec.height;
  out.t = t;
  out.sup = ex.sup;
  out.inf = ex.inf;
  out.nodes_inside = ex.nodes;
  out.h_mesh = solve.mesh->h_mesh();
  out.mesh_hash = solve.mesh->hash();
  out.gamma = gamma;
  out.data_norm = data_norm(*solve.mesh, data, r);
  out.data_term = out.data_norm * std::pow(t, gamma);
  if (data.homogeneous() && !(ex.inf > 0.0)) {
    std::ostringstream os;
    os << "inf over the inner section is " << ex.inf << " in a homogeneous run with nonnegative data";
    throw PositivityError(os.str());
  }
  out.quotient = ex.inf > 0.0 ? ex.sup / ex.inf : std::numeric_limits<double>::infinity();
  return out;
}

HarnackResult harnack_experiment(const HarnackSetup& setup, const ProblemData& data) {
  if (!(setup.t > 0.0) || setup.t > 0.5 * setup.section.height * (1.0 + 1e-12)) {
    throw ContractError("inner height must satisfy 0 < t <= h/2");
  }
  const SectionSolve solve = solve_on_section(setup.section, data, setup.mesh);
  return harnack_measure(solve, setup.t, data, setup.r, setup.gamma);
}

HarnackSweep harnack_scale_sweep(const PotentialPtr& potential, const Vector& x0, const std::vector<double>& heights,
                                 const ScalarField& pattern, const SectionMeshOptions& mesh) {
  HarnackSweep sweep;
  for (double h : heights) {
    const SectionSpec spec{potential, x0, h};
    const int n = potential->dimension();
    const Polytope body = extract_section(spec, mesh.resolution > 0 ? mesh.resolution : (n == 2 ? 256 : 400));
    const AffineMap T = john_normalize(body).map;
    ProblemData data(potential);
    data.boundary_g = [pattern, T](const Vector& x) { return pattern(T.apply_inverse(x)); };
    sweep.rows.push_back(harnack_measure(solve_on_section(spec, data, mesh), 0.5 * h, data, 0.0, -1.0));
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
    lo = std::min(lo, sweep.rows[i].quotient);
    hi = std::max(hi, sweep.rows[i].quotient);
  }
  sweep.band_after_first = sweep.rows.size() > 1 ? hi / lo : 1.0;
  return sweep;
}

// ---- oscillation -------------------------------------------------------------

HoelderResult oscillation_trace(const DiscreteField& u, const SectionLevel& level, double h0, int depth) {
  if (depth < 0 || depth > 8) throw ContractError("dyadic depth must lie in 0..8");
  HoelderResult out;
  out.h_mesh = u.mesh().h_mesh();
  out.mesh_hash = u.mesh().hash();
  const PointLocator locator(u.mesh_ptr());
  for (int k = 0; k <= depth; ++k) {
    const double h = h0 / std::pow(2.0, k);
    const SectionExtrema ex = section_extrema(u, locator, level, h);
    out.trace.heights.push_back(h);
    out.trace.sup.push_back(ex.sup);
    out.trace.inf.push_back(ex.inf);
    out.trace.osc.push_back(std::max(0.0, ex.sup - ex.inf));
    if (out.trace.osc.back() < 1e-12) {
      out.early_stop = true;
      break;
    }
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < out.trace.osc.size(); ++i) {
    if (out.trace.osc[i] < 1e-10) continue;
    lx.push_back(std::log(out.trace.heights[i]));
    ly.push_back(std::log(out.trace.osc[i]));
  }
  const LineFit fit = fit_line(lx, ly);
  out.gamma_osc = fit.slope;
  out.amplitude = fit.points >= 2 ? std::exp(fit.intercept) : 0.0;
  for (std::size_t i = 1; i < out.trace.osc.size(); ++i) {
    if (out.trace.osc[i - 1] <= 0.0) break;
    out.ratios.push_back(out.trace.osc[i] / out.trace.osc[i - 1]);
  }
  out.beta = out.ratios.empty() ? 0.0 : *std::max_element(out.ratios.begin(), out.ratios.end());
  out.recursion_holds = out.beta < 1.0;
  return out;
}

HoelderResult hoelder_experiment(const PotentialPtr& potential, const ProblemData& data, const Vector& x0, double h0,
                                 int depth, const SectionMeshOptions& mesh) {
  const SectionSolve solve = solve_on_section(SectionSpec{potential, x0, 2.0 * h0}, data, mesh);
  return oscillation_trace(solve.result.solution, SectionLevel(potential, x0), h0, depth);
}

HoelderL2Report hoelder_l2_report(const SectionSolve& solve, const ProblemData& data, double gamma,
                                  const std::vector<std::pair<Vector, Vector>>& pairs, double r) {
  const int n = solve.spec.potential->dimension();
  if (r <= 0.0) r = n;
  const DiscreteField& u = solve.result.solution;
  const PointLocator locator(solve.mesh);
  HoelderL2Report out;
  out.gamma = gamma;
  out.denominator = data_norm(*solve.mesh, data, r) + lp_norm(u, 2.0);
  for (const auto& [x, y] : pairs) {
    const double num = std::abs(locator.evaluate(u, x) - locator.evaluate(u, y));
    const double dist = (x - y).norm();
    if (dist <= 0.0) continue;
    ++out.pairs;
    if (num == 0.0) continue;
    out.constant = std::max(out.constant, num / (out.denominator * std::pow(dist, gamma)));
  }
  return out;
}

std::vector<std::pair<Vector, Vector>> random_pairs_in_section(const SectionLevel& level, double h, std::size_t count,
                                                               std::uint64_t seed) {
  const int n = static_cast<int>(level.center().size());
  double reach = 0.0;
  for (const auto& d : sphere_directions(n, n == 2 ? 64 : 100)) reach = std::max(reach, section_radius(level, h, d));
  reach *= 1.05;
  std::mt19937_64 rng(seed);
  auto draw = [&]() {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      Vector x = level.center();
      for (int i = 0; i < n; ++i) x[i] += uniform(rng, -reach, reach);
      if (level.inside(x, h)) return x;
    }
    throw ContractError("could not sample points inside the section");
  };
  std::vector<std::pair<Vector, Vector>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector x = draw();
    Vector y = draw();
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

// ---- Moser chain and log transform ---------------------------------------

namespace {

// (int g(u)^p)^{1/p} with g(u) = max(u, 0) + k, evaluated with the scale
// factor `top` >= sup g pulled out.
double shifted_norm(const DiscreteField& u, double k, double p, double top, const Region& region) {
  if (top <= 0.0) return 0.0;
  const double s = integrate(
      u, [&](const Vector&, double v) { return std::pow((std::max(v, 0.0) + k) / top, p); }, region);
  return top * std::pow(s, 1.0 / p);
}

}  // namespace

double interpolation_inequality_ratio(const DiscreteField& w, double q, const Region& region) {
  const double lhs = lp_norm(w, q, region);
  if (lhs == 0.0) return std::numeric_limits<double>::infinity();
  // the sup is taken over all nodes so that it dominates every quadrature value
  const double rhs = std::pow(linf_norm(w), 1.0 - 2.0 / q) * std::pow(lp_norm(w, 2.0, region), 2.0 / q);
  return rhs / lhs;
}

MoserChain moser_chain_audit(const DiscreteField& u, double k, const MoserSchedule& schedule, int depth,
                             const Region& region) {
  if (k < 0.0) throw ContractError("k must be nonnegative");
  MoserChain out;
  out.schedule = schedule;
  out.k = k;
  out.exponents = schedule.exponents(depth);
  // nodal max bounds the P1 field everywhere
  out.sup_u_plus = std::max(0.0, u.values().maxCoeff());
  const double top = out.sup_u_plus + k;
  for (double g : out.exponents) out.norms.push_back(shifted_norm(u, k, g, top, region));
  for (std::size_t m = 1; m < out.norms.size(); ++m) {
    out.ratios.push_back(out.norms[m - 1] > 0.0 ? out.norms[m] / out.norms[m - 1] : 0.0);
  }
  out.l2_u_plus = shifted_norm(u, 0.0, 2.0, out.sup_u_plus, region);
  const double den = k + out.l2_u_plus;
  out.terminal_ratio = den > 0.0 ? out.sup_u_plus / den : 0.0;

  // interpolation inequality for w = u^+ + k and for u^+ at q_hat
  const double qh = schedule.q_hat;
  double margin = std::numeric_limits<double>::infinity();
  for (double shift : {k, 0.0}) {
    const double t = out.sup_u_plus + shift;
    const double lhs = shifted_norm(u, shift, qh, t, region);
    if (lhs == 0.0) continue;
    const double rhs = std::pow(t, 1.0 - 2.0 / qh) * std::pow(shifted_norm(u, shift, 2.0, t, region), 2.0 / qh);
    margin = std::min(margin, rhs / lhs - 1.0);
  }
  if (std::isinf(margin)) margin = 0.0;  // nothing to audit: u^+ and k vanish
  out.interpolation_margin = margin;
  out.interpolation_ok = margin >= -1e-12;
  return out;
}

LogTransform log_transform_bound(const DiscreteField& u, double k, const Region& region) {
  if (!(k > 0.0)) throw ContractError("log transform needs k > 0");
  LogTransform out;
  out.k = k;
  out.M = std::max(0.0, u.values().maxCoeff());
  const double top = out.M + k;
  auto w = [&](double v) { return std::log(top / (top - std::max(v, 0.0))); };
  out.sup_w = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) out.sup_w = std::max(out.sup_w, w(u[i]));
  out.identity_value = std::log(top / k);
  out.identity_ok = std::abs(out.sup_w - out.identity_value) <= 1e-12 * std::max(1.0, out.identity_value);
  out.l2_w = std::sqrt(integrate(u, [&](const Vector&, double v) { const double z = w(v); return z * z; }, region));
  return out;
}

LogTransformSweep log_transform_sweep(const SectionSpec& section, const ProblemData& data,
                                      const std::vector<double>& scales, const SectionMeshOptions& mesh_opt,
                                      double r) {
  const int n = section.potential->dimension();
  if (r <= 0.0) r = n;
  const MeshPtr mesh = mesh_section(section, mesh_opt);
  LogTransformSweep out;
  std::vector<double> lx, ly;
  for (double s : scales) {
    ProblemData scaled = data;
    scaled.boundary_g = {};
    if (data.source_f) scaled.source_f = [f = data.source_f, s](const Vector& x) { return s * f(x); };
    if (data.flux_F) scaled.flux_F = [F = data.flux_F, s](const Vector& x) -> Vector { return s * F(x); };
    const double k = data_norm(*mesh, scaled, r);
    if (!(k > 0.0)) throw ContractError("log transform sweep needs nonzero f or F");
    const SolveResult res = solve_dirichlet(mesh, scaled);
    out.scales.push_back(s);
    out.rows.push_back(log_transform_bound(res.solution, k));
    if (out.rows.back().l2_w > 0.0) {
      lx.push_back(std::log(s));
      ly.push_back(std::log(out.rows.back().l2_w));
    }
  }
  out.slope = fit_line(lx, ly).slope;
  return out;
}

// ---- Sobolev ---------------------------------------------------------------

double sobolev_quotient(const DiscreteField& v, const CofactorField& phi, double p) {
  const double e = energy(v, [&](const Vector& x) { return phi(x); });
  if (!(e > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return lp_norm(v, p) / std::sqrt(e);
}

SobolevResult sobolev_ratio(const CofactorField& phi, MeshPtr mesh, double p, int random_members,
                            std::uint64_t seed) {
  const int n = mesh->dimension();
  if (p <= 0.0) p = n == 2 ? 4.0 : 2.0 * n / (n - 2.0);
  if (n == 2 && !(p > 2.0)) throw ContractError("p must exceed 2 in two dimensions");
  SobolevResult out;
  out.p = p;
  const Polytope& body = mesh->body();
  const Vector c = body.interior_point();
  const double inradius = body.boundary_distance(c);

  auto add = [&](const std::string& name, const ScalarField& f) {
    Vector vals(static_cast<Eigen::Index>(mesh->node_count()));
    for (std::size_t i = 0; i < mesh->node_count(); ++i) {
      vals[static_cast<Eigen::Index>(i)] = mesh->on_boundary(i) ? 0.0 : f(mesh->node(i));
    }
    SobolevMember m;
    m.name = name;
    const DiscreteField v(mesh, vals);
    m.ratio = sobolev_quotient(v, phi, p);
    m.excluded = !std::isfinite(m.ratio);
    if (!m.excluded) out.max_ratio = std::max(out.max_ratio, m.ratio);
    out.members.push_back(m);
  };

  for (double frac : {0.3, 0.6, 0.95}) {
    const double w = frac * inradius;
    add("bump_" + std::to_string(frac).substr(0, 4), [c, w](const Vector& x) {
      const double s = 1.0 - (x - c).squaredNorm() / (w * w);
      return s > 0.0 ? s * s : 0.0;
    });
  }
  std::mt19937_64 rng(seed);
  for (int m = 0; m < random_members; ++m) {
    std::vector<Vector> omega;
    std::vector<double> amp, phase;
    for (int i = 0; i < 3; ++i) {
      Vector w(n);
      for (int d = 0; d < n; ++d) w[d] = uniform(rng, -4.0, 4.0);
      omega.push_back(w);
      amp.push_back(uniform(rng, -1.0, 1.0));
      phase.push_back(uniform(rng, 0.0, 2.0 * std::numbers::pi));
    }
    const double base = uniform(rng, -1.0, 1.0);
    add("random_" + std::to_string(m), [&body, omega, amp, phase, base](const Vector& x) {
      double s = base;
      for (std::size_t i = 0; i < omega.size(); ++i) s += amp[i] * std::sin(omega[i].dot(x) + phase[i]);
      return std::max(0.0, body.boundary_distance(x)) * s;
    });
  }
  return out;
}

// ---- global and interior bounds --------------------------------------------

GlobalLinfResult global_linf_experiment(const PotentialPtr& potential, const Vector& x0,
                                        const std::vector<double>& heights, const ProblemData& data,
                                        const SectionMeshOptions& mesh, double r) {
  const int n = potential->dimension();
  if (r <= 0.0) r = n;
  if (!data.divB_certificate.nonpositive()) throw HypothesisError("global L-infinity bound needs div B <= 0");
  ProblemData zero_bc = data;
  zero_bc.boundary_g = {};
  GlobalLinfResult out;
  std::vector<double> lx, ly;
  for (double h : heights) {
    const SectionSolve s = solve_on_section(SectionSpec{potential, x0, h}, zero_bc, mesh);
    GlobalLinfRow row;
    row.h = h;
    row.linf = linf_norm(s.result.solution);
    row.data_norm = data_norm(*s.mesh, zero_bc, r);
    row.ratio = row.data_norm > 0.0 ? row.linf / row.data_norm : 0.0;
    row.h_mesh = s.mesh->h_mesh();
    out.rows.push_back(row);
    if (row.linf > 0.0) {
      lx.push_back(std::log(h));
      ly.push_back(std::log(row.linf));
    }
  }
  out.degenerate = lx.empty();
  if (out.degenerate) return out;
  out.gamma_fit = fit_line(lx, ly).slope;
  for (const auto& row : out.rows) {
    if (row.data_norm > 0.0) {
      out.constant = std::max(out.constant, row.linf / (row.data_norm * std::pow(row.h, out.gamma_fit)));
    }
  }
  return out;
}

InteriorL2Row interior_l2_measure(const SectionSolve& solve, double h, const ProblemData& data, double r) {
  const int n = solve.spec.potential->dimension();
  if (r <= 0.0) r = n;
  const SectionLevel level(solve.spec.potential, solve.spec.center);
  const DiscreteField& u = solve.result.solution;
  const PointLocator locator(solve.mesh);
  InteriorL2Row row;
  row.h = h;
  row.sup_half = section_extrema(u, locator, level, 0.5 * h).sup;
  row.l2 = lp_norm(u, 2.0, section_region(level, h));
  const double F = sup_norm(*solve.mesh, data.flux_F);
  const double f = data.source_f ? lp_norm(*solve.mesh, data.source_f, r) : 0.0;
  row.bracket = std::pow(h, -0.25 * n) * row.l2 + std::pow(h, 1.0 - 0.5 * n) * F + std::pow(h, 1.0 - n / (2.0 * r)) * f;
  row.ratio = row.bracket > 0.0 ? std::max(0.0, row.sup_half) / row.bracket : 0.0;
  return row;
}

InteriorL2Result interior_l2_experiment(const PotentialPtr& potential, const Vector& x0,
                                        const std::vector<double>& heights, const ProblemData& data,
                                        const SectionMeshOptions& mesh, double r) {
  InteriorL2Result out;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double h : heights) {
    const SectionSolve s = solve_on_section(SectionSpec{potential, x0, 2.0 * h}, data, mesh);
    out.rows.push_back(interior_l2_measure(s, h, data, r));
    if (out.rows.back().ratio > 0.0) {
      lo = std::min(lo, out.rows.back().ratio);
      hi = std::max(hi, out.rows.back().ratio);
    }
  }
  out.band = hi > 0.0 ? hi / lo : 0.0;
  return out;
}

}  // namespace malin
