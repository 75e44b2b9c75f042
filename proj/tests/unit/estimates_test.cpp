#include "malin/errors.hpp"
#include "malin/estimates.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace malin;
using malin::test::pi;

namespace {

PotentialPtr quadratic() { return PotentialSpec::quadratic(2).share(); }

MeshPtr disk_mesh(double target = 0.1) {
  return std::make_shared<const Mesh>(triangulate(malin::test::disk(256), target));
}

// Exact integral of v^4 for a P1 field: |T|/15 times the complete
// homogeneous symmetric polynomial of degree 4 in the three nodal values.
double exact_l4(const DiscreteField& v) {
  const Mesh& m = v.mesh();
  double total = 0.0;
  for (std::size_t k = 0; k < m.simplex_count(); ++k) {
    const auto s = m.simplex(k);
    const double a = v[s[0]], b = v[s[1]], c = v[s[2]];
    double h4 = 0.0;
    for (int i = 0; i <= 4; ++i)
      for (int j = 0; i + j <= 4; ++j) h4 += std::pow(a, i) * std::pow(b, j) * std::pow(c, 4 - i - j);
    total += m.measure(k) / 15.0 * h4;
  }
  return std::pow(total, 0.25);
}

double dirichlet_energy(const DiscreteField& v) {
  double e = 0.0;
  for (std::size_t k = 0; k < v.mesh().simplex_count(); ++k) e += v.mesh().measure(k) * v.gradient(k).squaredNorm();
  return e;
}

}  // namespace

TEST_CASE("Moser schedule") {
  const MoserSchedule a = moser_schedule(2.0, 3);
  CHECK(a.q_hat == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(a.n_hat == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(a.chi == doctest::Approx(1.5).epsilon(1e-15));

  const MoserSchedule b = moser_schedule(2.0, 2);
  CHECK(b.q_hat == 4.0);
  CHECK(b.n_hat == 8.0);
  CHECK(b.chi == 2.0);

  const MoserSchedule c = moser_schedule(3.0, 2);
  CHECK(c.q_hat == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(c.n_hat == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(c.chi == doctest::Approx(2.0).epsilon(1e-15));

  CHECK_THROWS_AS(moser_schedule(1.0, 2), HypothesisError);
  CHECK_THROWS_AS(moser_schedule(1.5, 3), HypothesisError);
}

TEST_CASE("Moser exponents grow by chi") {
  for (const auto& [q, n] : {std::pair{2.0, 2}, std::pair{2.0, 3}, std::pair{3.0, 2}, std::pair{1.7, 3}, std::pair{5.0, 3}}) {
    const MoserSchedule s = moser_schedule(q, n);
    CHECK(s.chi > 1.0);
    const auto e = s.exponents(8);
    REQUIRE(e.size() == 9);
    CHECK(e[0] == doctest::Approx(s.q_hat));
    for (std::size_t m = 1; m < e.size(); ++m) {
      CHECK(e[m] > e[m - 1]);
      CHECK(e[m] / e[m - 1] == doctest::Approx(s.chi).epsilon(1e-14));
    }
  }
}

TEST_CASE("gamma formula") {
  CHECK(gamma_formula(2, 2.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gamma_formula(2, 2.0, 1e6) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gamma_formula(3, 3.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gamma_formula(2, 8.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gamma_formula(2, 8.0, 3.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(gamma_formula(2, 1.0, 1.0), HypothesisError);
  CHECK_THROWS_AS(gamma_formula(3, 1.5, 1.0), HypothesisError);
}

TEST_CASE("fit_line recovers an exact line") {
  const LineFit f = fit_line({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.points == 4);
  CHECK_THROWS_AS(fit_line({1.0}, {1.0, 2.0}), ContractError);
}

TEST_CASE("random boundary data is nonnegative with the requested margin") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RandomBoundaryData g(2, seed, Vector::Zero(2), 3, 0.1);
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 4096; ++i) {
      const double th = 2 * pi * i / 4096;
      const double v = g(vec2(std::cos(th), std::sin(th)));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(lo > 0.0);
    CHECK(lo == doctest::Approx(0.1 * (hi - lo)).epsilon(0.02));
    // Harmonic extension: mean value at the centre is the offset.
    CHECK(g.harmonic_extension(Vector::Zero(2), 1.0) == doctest::Approx(g.offset()).epsilon(1e-12));
  }
}

TEST_CASE("Harnack quotient of constants is one") {
  ProblemData data(quadratic());
  data.boundary_g = [](const Vector&) { return 1.0; };
  HarnackSetup setup;
  setup.section = {quadratic(), Vector::Zero(2), 0.5};
  setup.t = 0.25;
  const HarnackResult r = harnack_experiment(setup, data);
  CHECK(r.sup == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.inf == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.quotient == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.data_term == 0.0);
}

TEST_CASE("Harnack extremes of an affine solution") {
  for (double h : {0.5, 0.25, 0.125}) {
    ProblemData data(quadratic());
    data.boundary_g = [](const Vector& x) { return x[0] + 2.0; };
    HarnackSetup setup;
    setup.section = {quadratic(), Vector::Zero(2), h};
    setup.t = h / 2;
    const HarnackResult r = harnack_experiment(setup, data);
    CHECK(r.sup == doctest::Approx(2.0 + std::sqrt(h)).epsilon(1e-10));
    CHECK(r.inf == doctest::Approx(2.0 - std::sqrt(h)).epsilon(1e-10));
  }
}

TEST_CASE("Harnack quotient is invariant under positive scaling of g") {
  const auto p = PotentialSpec::perturbed(2, 0.1, vec2(1.3, 0.7)).share();
  const RandomBoundaryData g(2, 17, Vector::Zero(2));
  HarnackSetup setup;
  setup.section = {p, Vector::Zero(2), 0.5};
  setup.t = 0.25;
  ProblemData one(p);
  one.boundary_g = g.field();
  ProblemData scaled(p);
  scaled.boundary_g = [g](const Vector& x) { return 3.5 * g(x); };
  const HarnackResult a = harnack_experiment(setup, one);
  const HarnackResult b = harnack_experiment(setup, scaled);
  CHECK(b.sup == doctest::Approx(3.5 * a.sup).epsilon(1e-10));
  CHECK(b.inf == doctest::Approx(3.5 * a.inf).epsilon(1e-10));
  CHECK(std::abs(b.quotient - a.quotient) <= 1e-10 * a.quotient);
}

TEST_CASE("Harnack rejects nonpositive solutions and bad heights") {
  ProblemData data(quadratic());
  data.boundary_g = [](const Vector& x) { return x[0]; };
  HarnackSetup setup;
  setup.section = {quadratic(), Vector::Zero(2), 0.5};
  setup.t = 0.25;
  CHECK_THROWS_AS(harnack_experiment(setup, data), PositivityError);
  setup.t = 0.3;
  CHECK_THROWS_AS(harnack_experiment(setup, data), ContractError);
}

TEST_CASE("oscillation of an affine field") {
  const double h0 = 0.5;
  const SectionLevel level(quadratic(), Vector::Zero(2));
  const MeshPtr mesh = mesh_section({quadratic(), Vector::Zero(2), h0}, {});
  const DiscreteField u = DiscreteField::interpolate(mesh, [](const Vector& x) { return x[0]; });
  const HoelderResult r = oscillation_trace(u, level, h0, 5);
  REQUIRE(r.trace.osc.size() == 6);
  for (std::size_t k = 0; k < r.trace.osc.size(); ++k) {
    CHECK(r.trace.osc[k] == doctest::Approx(2.0 * std::sqrt(2.0 * r.trace.heights[k])).epsilon(1e-10));
  }
  for (double q : r.ratios) CHECK(q == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(r.gamma_osc == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(r.beta < 1.0);
  CHECK_FALSE(r.early_stop);
}

TEST_CASE("oscillation of a constant stops early") {
  const SectionLevel level(quadratic(), Vector::Zero(2));
  const MeshPtr mesh = mesh_section({quadratic(), Vector::Zero(2), 0.5}, {});
  const DiscreteField u = DiscreteField::interpolate(mesh, [](const Vector&) { return 3.0; });
  const HoelderResult r = oscillation_trace(u, level, 0.5, 4);
  CHECK(r.early_stop);
  for (double o : r.trace.osc) CHECK(o < 1e-12);
}

TEST_CASE("oscillation is monotone in the height") {
  const auto p = PotentialSpec::perturbed(2, 0.1, vec2(1.3, 0.7)).share();
  ProblemData data(p);
  data.boundary_g = RandomBoundaryData(2, 3, Vector::Zero(2)).field();
  const HoelderResult r = hoelder_experiment(p, data, Vector::Zero(2), 0.25, 5, {});
  for (std::size_t k = 1; k < r.trace.osc.size(); ++k) {
    CHECK(r.trace.osc[k] >= 0.0);
    CHECK(r.trace.osc[k] <= r.trace.osc[k - 1] + 1e-14);
  }
}

TEST_CASE("Hoelder L2 report") {
  ProblemData data(quadratic());
  data.boundary_g = [](const Vector&) { return 2.0; };
  const SectionSolve c = solve_on_section({quadratic(), Vector::Zero(2), 0.5}, data, {});
  const SectionLevel level(quadratic(), Vector::Zero(2));
  const auto pairs = random_pairs_in_section(level, 0.25, 50, 1);
  CHECK(pairs.size() == 50);
  CHECK(hoelder_l2_report(c, data, 0.5, pairs).constant < 1e-12);

  // u = x1 on pairs along a diameter: each pair gives |dx|^(1 - gamma) / D,
  // largest for the widest pair when gamma < 1.
  ProblemData lin(quadratic());
  lin.boundary_g = [](const Vector& x) { return x[0]; };
  const SectionSolve s = solve_on_section({quadratic(), Vector::Zero(2), 0.5}, lin, {});
  const std::vector<std::pair<Vector, Vector>> diameter = {
      {vec2(-0.5, 0), vec2(0.5, 0)}, {vec2(-0.1, 0), vec2(0.1, 0)}, {vec2(0.0, 0), vec2(0.02, 0)}};
  const double gamma = 0.5;
  const HoelderL2Report rep = hoelder_l2_report(s, lin, gamma, diameter);
  CHECK(rep.pairs == 3);
  const double denominator = lp_norm(s.result.solution, 2.0);
  CHECK(rep.denominator == doctest::Approx(denominator).epsilon(1e-12));
  CHECK(rep.constant == doctest::Approx(std::pow(1.0, 1 - gamma) / denominator).epsilon(1e-9));
}

TEST_CASE("Moser chain on constant fields") {
  const MeshPtr mesh = disk_mesh(0.2);
  const double area = mesh->total_measure();
  const MoserSchedule s = moser_schedule(2.0, 2);

  const MoserChain zero = moser_chain_audit(DiscreteField::zero(mesh), 1.0, s, 4);
  REQUIRE(zero.norms.size() == 5);
  for (std::size_t m = 0; m < zero.norms.size(); ++m) {
    CHECK(zero.norms[m] == doctest::Approx(std::pow(area, 1.0 / zero.exponents[m])).epsilon(1e-12));
  }
  CHECK(zero.terminal_ratio == 0.0);

  const double c = 2.5;
  const MoserChain constant =
      moser_chain_audit(DiscreteField::interpolate(mesh, [c](const Vector&) { return c; }), 1.0, s, 4);
  for (std::size_t m = 0; m < constant.norms.size(); ++m) {
    CHECK(constant.norms[m] == doctest::Approx((c + 1.0) * std::pow(area, 1.0 / constant.exponents[m])).epsilon(1e-12));
  }
  CHECK(constant.interpolation_ok);
}

TEST_CASE("interpolation inequality on random fields") {
  const MeshPtr mesh = disk_mesh(0.2);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector v(static_cast<Eigen::Index>(mesh->node_count()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u(rng);
    const DiscreteField w(mesh, v);
    for (double q : {3.0, 4.0, 8.0}) CHECK(interpolation_inequality_ratio(w, q) >= 1.0 - 1e-12);
    const MoserChain chain = moser_chain_audit(w, 0.5, moser_schedule(2.0, 2), 3);
    CHECK(chain.interpolation_ok);
  }
}

TEST_CASE("log transform") {
  const MeshPtr mesh = disk_mesh(0.2);
  const LogTransform zero = log_transform_bound(DiscreteField::zero(mesh), 1.0);
  CHECK(zero.sup_w == 0.0);
  CHECK(zero.identity_value == 0.0);
  CHECK(zero.identity_ok);

  const DiscreteField bump =
      DiscreteField::interpolate(mesh, [](const Vector& x) { return std::max(0.0, 1.0 - 4.0 * x.squaredNorm()); });
  const LogTransform one = log_transform_bound(bump, 1.0);
  CHECK(one.M == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.sup_w == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(one.identity_ok);
  CHECK_THROWS_AS(log_transform_bound(bump, 0.0), ContractError);
}

TEST_CASE("Sobolev quotient against an exact quadrature oracle") {
  const MeshPtr mesh = disk_mesh(0.1);
  const CofactorField phi(quadratic());
  const DiscreteField v =
      DiscreteField::interpolate(mesh, [](const Vector& x) { return std::pow(std::max(0.0, 1.0 - x.squaredNorm()), 2); });
  const double oracle = exact_l4(v) / std::sqrt(dirichlet_energy(v));
  CHECK(sobolev_quotient(v, phi, 4.0) == doctest::Approx(oracle).epsilon(1e-10));

  const DiscreteField seven(mesh, 7.0 * v.values());
  CHECK(sobolev_quotient(seven, phi, 4.0) == doctest::Approx(sobolev_quotient(v, phi, 4.0)).epsilon(1e-12));
  CHECK(std::isnan(sobolev_quotient(DiscreteField::zero(mesh), phi, 4.0)));
}

TEST_CASE("Sobolev ratio over the test family") {
  const CofactorField phi(quadratic());
  const SobolevResult r = sobolev_ratio(phi, disk_mesh(0.1), 0.0, 10, 3);
  CHECK(r.p == 4.0);
  CHECK(std::isfinite(r.max_ratio));
  CHECK(r.max_ratio > 0.0);
  CHECK(r.members.size() >= 13);
  double best = 0.0;
  for (const auto& m : r.members)
    if (!m.excluded) best = std::max(best, m.ratio);
  CHECK(best == r.max_ratio);
  CHECK_THROWS_AS(sobolev_ratio(phi, disk_mesh(0.3), 2.0), ContractError);
}

TEST_CASE("global bound with zero data is degenerate") {
  ProblemData data(quadratic());
  const GlobalLinfResult r = global_linf_experiment(quadratic(), Vector::Zero(2), {0.5, 0.25}, data, {});
  CHECK(r.degenerate);
  for (const auto& row : r.rows) CHECK(row.linf == 0.0);
}

TEST_CASE("global bound against the radial solution") {
  ProblemData data(quadratic());
  data.source_f = [](const Vector&) { return 1.0; };
  SectionMeshOptions mesh;
  mesh.relative_size = 0.05;
  const GlobalLinfResult r = global_linf_experiment(quadratic(), Vector::Zero(2), {0.5, 0.25, 0.125}, data, mesh, 2.0);
  for (const auto& row : r.rows) CHECK(row.linf == doctest::Approx(row.h / 2).epsilon(0.01));
  CHECK(r.gamma_fit == doctest::Approx(1.0).epsilon(0.01));
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("interior L2 bound of a constant") {
  ProblemData data(quadratic());
  data.boundary_g = [](const Vector&) { return 1.0; };
  const InteriorL2Result r = interior_l2_experiment(quadratic(), Vector::Zero(2), {0.25, 0.125, 0.0625}, data, {});
  for (const auto& row : r.rows) {
    CHECK(row.sup_half == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row.ratio == doctest::Approx(1.0 / std::sqrt(2 * pi)).epsilon(0.03));
  }
  CHECK(r.band < 1.05);

  ProblemData zero(quadratic());
  zero.source_f = [](const Vector&) { return 0.0; };
  zero.flux_F = [](const Vector&) { return vec2(1.0, 0.0); };
  const SectionSolve s = solve_on_section({quadratic(), Vector::Zero(2), 0.5}, ProblemData(quadratic()), {});
  CHECK(interior_l2_measure(s, 0.25, zero, 2.0).ratio == 0.0);
}

TEST_CASE("estimate report validity and JSON round trip") {
  EstimateReport r;
  r.kind = "harnack";
  r.label = "q";
  r.family = "Quadratic";
  r.scales = {0.5, 0.25, 0.125};
  r.measured = {{"quotient", 1.5}, {"rows", {1.0, 2.0}}};
  r.notes = {"a note"};
  r.mesh_hash = 12345;
  CHECK(r.valid());
  const EstimateReport back = EstimateReport::from_json(r.to_json());
  CHECK(back.to_json() == r.to_json());

  EstimateReport bad = r;
  bad.scales = {0.5, 0.3};
  std::string why;
  CHECK_FALSE(bad.valid(&why));
  CHECK_FALSE(why.empty());
  bad = r;
  bad.measured["quotient"] = std::nan("");
  CHECK_FALSE(bad.valid());
}
