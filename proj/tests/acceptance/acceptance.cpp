// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include "malin/estimates.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace malin;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      pass = false;
      detail << " FAIL[" << what << "]";
    }
  }
};

std::vector<double> dyadic(int first, int last) {
  std::vector<double> h;
  for (int k = first; k <= last; ++k) h.push_back(std::ldexp(1.0, -k));
  return h;
}

double band(const std::vector<double>& v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

double relative_change(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

SectionSpec normalized_section(const SectionSpec& spec, int resolution) {
  const AffineMap T = john_normalize(extract_section(spec, resolution)).map;
  return rescale_problem(ProblemData(spec.potential), spec, T).section;
}

// ---------------------------------------------------------------------------

void criterion1(Outcome& out) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  double adjugate = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 2;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
    const Matrix h = m * m.transpose() + Matrix::Identity(n, n);
    const Matrix lhs = cofactor(h) * h;
    adjugate = std::max(adjugate, (lhs - h.determinant() * Matrix::Identity(n, n)).norm() / h.determinant());
  }
  out.require(adjugate < 1e-12, "adjugate identity");

  auto perturbed = PotentialSpec::perturbed(2, 0.1, vec2(1.3, 0.7)).share();
  CofactorField phi(perturbed);
  const Vector x = vec2(0.21, -0.34);
  const double r1 = divergence_free_residual(phi, x, 1e-2).norm();
  const double r2 = divergence_free_residual(phi, x, 5e-3).norm();
  const double order = std::log2(r1 / r2);
  out.require(order > 1.9 && order < 2.1, "divergence-free residual order");

  const MoserSchedule s = moser_schedule(2.0, 3);
  const double moser_err = std::max({std::abs(s.q_hat - 4.0), std::abs(s.n_hat - 6.0), std::abs(s.chi - 1.5)});
  out.require(moser_err < 1e-12, "moser schedule");
  const double gamma_err = std::abs(gamma_formula(2, 2.0, 1.0) - 0.5);
  out.require(gamma_err < 1e-12, "gamma formula");
  out.detail << "adjugate=" << adjugate << " residual_order=" << order << " moser_err=" << moser_err
             << " gamma_err=" << gamma_err;
}

void criterion2(Outcome& out) {
  auto quad = PotentialSpec::quadratic(2).share();
  const Vector x0 = vec2(0, 0);
  double radius_err = 0.0;
  for (double h : dyadic(1, 8)) {
    SectionSpec spec{quad, x0, h};
    for (const Vector& d : sphere_directions(2, 64))
      radius_err = std::max(radius_err, std::abs(section_radius(spec, d) - std::sqrt(2 * h)));
  }
  out.require(radius_err < 1e-9, "disk radii");

  const VolumeScaling vs = section_volume_scaling(quad, x0, dyadic(1, 8));
  double ratio_err = 0.0;
  for (const auto& row : vs.rows) ratio_err = std::max(ratio_err, std::abs(row.ratio - 2 * kPi));
  out.require(ratio_err < 1e-6, "volume ratio 2pi");

  double inner = 1e300, outer = 0.0;
  const std::vector<PotentialPtr> families = {
      quad, PotentialSpec::anisotropic(vec2(4, 0.25)).share(),
      PotentialSpec::perturbed(2, 0.1, vec2(1.3, 0.7)).share()};
  for (const auto& pot : families) {
    for (double h : {0.5, 0.125}) {
      const Polytope body = extract_section(SectionSpec{pot, x0, h}, 256);
      const NormalizedBody nb = john_normalize(body);
      const NormalizationCheck check = verify_normalized(nb.normalized, 1e-6, 720);
      out.require(check.ok, "john inclusion " + pot->label());
      inner = std::min(inner, check.min_support);
      outer = std::max(outer, check.max_support);
    }
  }
  out.detail << "radius_err=" << radius_err << " ratio_err=" << ratio_err << " support=[" << inner << ","
             << outer << "]";
}

double manufactured_error(int refinements, double* h_mesh) {
  auto aniso = PotentialSpec::anisotropic(vec2(4, 0.25)).share();
  auto quad = PotentialSpec::quadratic(2).share();
  // S_quad(0, 1/2) is the unit disk.
  SectionSpec disk{quad, vec2(0, 0), 0.5};
  ProblemData d(aniso);
  d.drift_b = [](const Vector&) { return vec2(0.3, 0.0); };
  d.drift_B = [](const Vector& x) { return Vector(-0.1 * x); };
  d.div_B = [](const Vector&) { return -0.2; };
  auto exact = [](const Vector& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };
  // Phi = diag(a_2, a_1) = diag(0.25, 4).
  d.source_f = [exact](const Vector& x) {
    const double u = exact(x);
    const double ux = kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]);
    const double uy = kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]);
    // -div(Phi Du) - div(u B) + b.Du with B = -0.1 x: -div(uB) = 0.1 x.Du + 0.2 u
    return kPi * kPi * (0.25 + 4.0) * u + 0.1 * (x[0] * ux + x[1] * uy) + 0.2 * u + 0.3 * ux;
  };
  d.boundary_g = exact;
  SectionMeshOptions mo;
  mo.relative_size = 0.1;
  mo.refinements = refinements;
  const SectionSolve s = solve_on_section(disk, d, mo);
  *h_mesh = s.mesh->h_mesh();
  return l2_error(s.result.solution, exact);
}

void criterion3(Outcome& out) {
  std::vector<double> err(4), hm(4);
  for (int l = 0; l <= 3; ++l) err[l] = manufactured_error(l, &hm[l]);
  double min_order = 1e300;
  out.detail << "errors=";
  for (int l = 0; l <= 3; ++l) {
    out.detail << err[l] << (l < 3 ? "," : "");
    if (l > 0) min_order = std::min(min_order, std::log(err[l - 1] / err[l]) / std::log(hm[l - 1] / hm[l]));
  }
  out.detail << " min_order=" << min_order;
  out.require(min_order >= 1.9, "L2 order");
}

void criterion4(Outcome& out) {
  const std::vector<PotentialPtr> pots = {PotentialSpec::quadratic(2).share(),
                                          PotentialSpec::perturbed(2, 0.1, vec2(1.3, 0.7)).share()};
  int violations = 0;
  double worst = 0.0;
  int runs = 0;
  for (int seed = 0; seed < 50; ++seed) {
    const PotentialPtr& pot = pots[seed % 2];
    SectionSpec spec{pot, vec2(0, 0), 0.5};
    RandomBoundaryData g(2, 1000 + seed, spec.center);
    ProblemData d(pot);
    // Shift by a signed constant so both the one- and two-sided cases occur.
    const double shift = (seed % 4 < 2) ? 0.0 : -g.offset() - 0.5;
    d.boundary_g = [g, shift](const Vector& x) { return g(x) + shift; };
    if (seed % 3 != 0) {
      d.drift_b = [](const Vector&) { return vec2(0.3, 0.0); };
      d.drift_B = [](const Vector& x) { return Vector(-0.1 * x); };
      d.div_B = [](const Vector&) { return -0.2; };
    }
    const SectionSolve s = solve_on_section(spec, d, SectionMeshOptions{});
    const MaximumPrincipleReport r = maximum_principle_check(s.result, d);
    ++runs;
    if (!r.pass) ++violations;
    worst = std::max(worst, r.violation / std::max(1e-300, r.boundary_max - r.boundary_min));
  }
  out.detail << "runs=" << runs << " violations=" << violations << " worst_relative=" << worst;
  out.require(violations == 0, "interior extremum");
}

void criterion5(Outcome& out) {
  auto quad = PotentialSpec::quadratic(2).share();
  SectionSpec spec{quad, vec2(0, 0), 0.5};
  const MeshPtr mesh = mesh_section(spec, SectionMeshOptions{});
  const double bound = 9.0 * (1.0 + 5.0 * mesh->h_mesh());
  double qmax = 0.0, qmin = 1e300, oracle_max = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    RandomBoundaryData g(2, seed, spec.center);
    ProblemData d(quad);
    d.boundary_g = g.field();
    SectionSolve s{spec, mesh, solve_dirichlet(mesh, d)};
    const HarnackResult r = harnack_measure(s, 0.25, d, 0.0, -1.0);
    qmax = std::max(qmax, r.quotient);
    qmin = std::min(qmin, r.quotient);
    // Poisson-integral oracle on the circle bounding S(0, 1/4).
    const double rho = std::sqrt(2 * 0.25);
    double hi = 0.0, lo = 1e300;
    for (int i = 0; i < 2048; ++i) {
      const double a = 2 * kPi * i / 2048;
      const double v = g.harmonic_extension(vec2(rho * std::cos(a), rho * std::sin(a)), 1.0);
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    oracle_max = std::max(oracle_max, hi / lo);
  }
  out.detail << "quotient=[" << qmin << "," << qmax << "] bound=" << bound << " oracle_max=" << oracle_max
             << " h_mesh=" << mesh->h_mesh();
  out.require(qmax <= bound, "upper bound 9(1+5h)");
  out.require(qmin >= 1.0, "quotient >= 1");
}

void criterion6(Outcome& out) {
  const std::vector<PotentialPtr> pots = {PotentialSpec::anisotropic(vec2(4, 0.25)).share(),
                                          PotentialSpec::perturbed(2, 0.1, vec2(1.3, 0.7)).share()};
  RandomBoundaryData pattern(2, 7, vec2(0, 0));
  for (const auto& pot : pots) {
    const HarnackSweep sweep = harnack_scale_sweep(pot, vec2(0, 0), dyadic(1, 5), pattern.field(), {});
    out.detail << pot->label() << ": band=" << sweep.band_after_first << " q=";
    for (const auto& r : sweep.rows) out.detail << r.quotient << " ";
    out.require(sweep.band_after_first <= 3.0, "band " + pot->label());
  }
}

void criterion7(Outcome& out) {
  auto quad = PotentialSpec::quadratic(2).share();
  ProblemData d(quad);
  d.source_f = [](const Vector&) { return 1.0; };
  SectionMeshOptions mo;
  mo.relative_size = 0.05;
  const GlobalLinfResult g = global_linf_experiment(quad, vec2(0, 0), dyadic(1, 5), d, mo, 2.0);
  double finest_rel = 0.0;
  for (const auto& row : g.rows) finest_rel = std::abs(row.linf / (row.h / 2) - 1.0);
  out.detail << "finest_rel_err=" << finest_rel << " gamma_fit=" << g.gamma_fit;
  out.require(finest_rel <= 0.02, "h/2 within 2%");
  out.require(std::abs(g.gamma_fit - 1.0) <= 0.05, "gamma 1 +- 0.05");
}

ProblemData hoelder_data(const PotentialPtr& pot) {
  ProblemData d(pot);
  RandomBoundaryData g(2, 3, vec2(0, 0));
  d.boundary_g = g.field();
  d.drift_b = [](const Vector&) { return vec2(0.3, 0.0); };
  d.drift_B = [](const Vector& x) { return Vector(-0.1 * x); };
  d.div_B = [](const Vector&) { return -0.2; };
  return d;
}

void criterion8(Outcome& out) {
  auto aniso = PotentialSpec::anisotropic(vec2(4, 0.25)).share();
  const ProblemData d = hoelder_data(aniso);
  const double h0 = 0.25;
  SectionLevel level(aniso, vec2(0, 0));
  const auto pairs = random_pairs_in_section(level, h0, 200, 5);
  double gam[2], cst[2];
  for (int l = 0; l < 2; ++l) {
    SectionMeshOptions mo;
    mo.refinements = l;
    const HoelderResult hr = hoelder_experiment(aniso, d, vec2(0, 0), h0, 6, mo);
    const SectionSolve s = solve_on_section(SectionSpec{aniso, vec2(0, 0), 2 * h0}, d, mo);
    const HoelderL2Report rep = hoelder_l2_report(s, d, hr.gamma_osc, pairs);
    gam[l] = hr.gamma_osc;
    cst[l] = rep.constant;
    out.detail << "L" << l << ": gamma_osc=" << gam[l] << " beta=" << hr.beta << " C=" << cst[l] << " ";
  }
  out.require(gam[0] > 0 && gam[1] > 0, "gamma_osc > 0");
  out.require(relative_change(gam[0], gam[1]) <= 0.1, "gamma refinement");
  out.require(std::isfinite(cst[0]) && std::isfinite(cst[1]), "constant finite");
  out.require(relative_change(cst[0], cst[1]) <= 0.1, "constant refinement");
}

void criterion9(Outcome& out) {
  auto pert = PotentialSpec::perturbed(2, 0.1, vec2(1.3, 0.7)).share();
  const SectionSpec spec{pert, vec2(0, 0), 0.25};
  const AffineMap T = john_normalize(extract_section(spec, 256)).map;
  RescaledPotential tilde(pert, T);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double det_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vector y = vec2(unit(rng), unit(rng));
    const double lhs = tilde.eval(y).hessian.determinant();
    const double rhs = pert->eval(T.apply(y)).hessian.determinant();
    det_err = std::max(det_err, std::abs(lhs - rhs));
  }
  out.require(det_err <= 1e-10, "determinant conjugation");

  ProblemData d(pert);
  d.boundary_g = [](const Vector& x) { return std::cos(x[0]) + x[1] * x[1]; };
  d.source_f = [](const Vector& x) { return 1.0 + x[0]; };
  d.drift_b = [](const Vector&) { return vec2(0.3, 0.0); };
  const RescaledProblem rp = rescale_problem(d, spec, T);
  // Both meshes cover the same polygon up to T, triangulated independently.
  auto body = std::make_shared<const Polytope>(extract_section(spec, 256));
  auto pulled = std::make_shared<const Polytope>(body->transformed(T.inverse()));
  Mesh ma = triangulate(body, 0.1 * body->boundary_distance(spec.center));
  Mesh mb = triangulate(pulled, 0.1 * pulled->boundary_distance(pulled->interior_point()));
  // Nodes of the coarsest rescaled mesh stay nodes under refinement.
  std::vector<Vector> samples(mb.nodes().begin(), mb.nodes().end());
  std::vector<double> disc, hm;
  for (int l = 0; l < 3; ++l) {
    if (l > 0) {
      ma = refine(ma);
      mb = refine(mb);
    }
    const SolveResult a = solve_dirichlet(std::make_shared<const Mesh>(ma), d);
    const SolveResult b = solve_dirichlet(std::make_shared<const Mesh>(mb), rp.data);
    const TransformDiscrepancy td = verify_solution_transform(a, b, T, samples);
    disc.push_back(td.max_discrepancy);
    hm.push_back(td.coarser_h);
  }
  const double order = std::log(disc[0] / disc[2]) / std::log(hm[0] / hm[2]);
  const double last_order = std::log(disc[1] / disc[2]) / std::log(hm[1] / hm[2]);
  out.require(order >= 1.5 && last_order >= 1.8, "transform discrepancy O(h^2)");

  const std::vector<PotentialPtr> families = {
      PotentialSpec::quadratic(2).share(), PotentialSpec::anisotropic(vec2(4, 0.25)).share(), pert,
      PotentialSpec::radial_power(2, 3.0).share()};
  double worst_band = 0.0;
  for (const auto& pot : families) {
    const Vector x0 = pot->admissible(vec2(0, 0)) && pot->family_name() != "RadialPower" ? vec2(0, 0) : vec2(1, 0);
    const ScaleFactorAudit audit = scale_factor_audit(pot, x0, dyadic(3, 10));
    worst_band = std::max(worst_band, audit.band());
  }
  out.require(worst_band <= 10.0, "scale factor band");
  out.detail << "det_err=" << det_err << " discrepancy=" << disc[0] << "," << disc[1] << "," << disc[2]
             << " order=" << order << " last_order=" << last_order << " worst_band=" << worst_band;
}

void criterion10(Outcome& out) {
  auto quad = PotentialSpec::quadratic(2).share();
  const SectionSpec normalized = normalized_section(SectionSpec{quad, vec2(0, 0), 0.5}, 256);
  ProblemData d(normalized.potential);
  d.source_f = [](const Vector& x) { return 1.0 + 0.5 * std::sin(2 * x[0]) * std::cos(x[1]); };
  d.flux_F = [](const Vector& x) { return vec2(0.2 * x[1], 0.1); };
  const MoserSchedule sched = moser_schedule(2.0, 2);
  double terminal[2];
  bool interpolation = true;
  for (int l = 0; l < 2; ++l) {
    SectionMeshOptions mo;
    mo.refinements = l;
    const SectionSolve s = solve_on_section(normalized, d, mo);
    const double k = data_norm(*s.mesh, d, 2.0);
    const MoserChain chain = moser_chain_audit(s.result.solution, k, sched, 4);
    terminal[l] = chain.terminal_ratio;
    interpolation = interpolation && chain.interpolation_ok;
    out.detail << "L" << l << ": terminal=" << chain.terminal_ratio << " margin=" << chain.interpolation_margin
               << " ";
  }
  out.require(std::isfinite(terminal[0]) && std::isfinite(terminal[1]), "terminal finite");
  out.require(relative_change(terminal[0], terminal[1]) <= 0.1, "terminal refinement");
  out.require(interpolation, "interpolation inequality");
}

void criterion11(Outcome& out) {
  const std::vector<PotentialPtr> pots = {PotentialSpec::quadratic(2).share(),
                                          PotentialSpec::anisotropic(vec2(4, 0.25)).share()};
  double homogeneity = 0.0;
  for (const auto& pot : pots) {
    std::vector<double> ratios;
    for (double h : dyadic(1, 4)) {
      const SectionSpec normalized = normalized_section(SectionSpec{pot, vec2(0, 0), h}, 256);
      const MeshPtr mesh = mesh_section(normalized, SectionMeshOptions{});
      CofactorField phi(normalized.potential);
      const SobolevResult r = sobolev_ratio(phi, mesh);
      out.require(std::isfinite(r.max_ratio) && r.max_ratio > 0, "finite ratio");
      ratios.push_back(r.max_ratio);
      if (h == 0.5) {
        const Vector& c = mesh->body().interior_point();
        DiscreteField v = DiscreteField::interpolate(mesh, [&](const Vector& x) {
          return std::max(0.0, 0.5 - (x - c).squaredNorm());
        });
        const double q1 = sobolev_quotient(v, phi, r.p);
        DiscreteField w = DiscreteField::interpolate(mesh, [&](const Vector& x) {
          return 7.0 * std::max(0.0, 0.5 - (x - c).squaredNorm());
        });
        homogeneity = std::max(homogeneity, std::abs(sobolev_quotient(w, phi, r.p) - q1) / q1);
      }
    }
    out.detail << pot->label() << ": max=" << *std::max_element(ratios.begin(), ratios.end())
               << " band=" << band(ratios) << " ";
    out.require(band(ratios) <= 10.0, "bounded across scales");
  }
  out.detail << "homogeneity=" << homogeneity;
  out.require(homogeneity <= 1e-10, "homogeneity");
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> run;
    double limit_seconds;  // 0: no runtime bound
  };
  const std::vector<Criterion> criteria = {
      {1, "algebraic identities", criterion1, 1.0},  {2, "geometry exactness", criterion2, 10.0},
      {3, "solver convergence", criterion3, 60.0},   {4, "maximum principle", criterion4, 60.0},
      {5, "harnack baseline", criterion5, 300.0},    {6, "harnack scale stability", criterion6, 0.0},
      {7, "global Linf scaling", criterion7, 60.0},  {8, "oscillation decay", criterion8, 0.0},
      {9, "rescaling invariance", criterion9, 0.0},  {10, "moser chain", criterion10, 0.0},
      {11, "sobolev ratio", criterion11, 0.0},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0) out.require(secs < c.limit_seconds, "runtime");
    if (!out.pass) ++failures;
    std::printf("[%s] %2d %-26s %7.2fs  %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                out.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
