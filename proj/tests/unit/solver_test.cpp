#include "malin/errors.hpp"
#include "malin/estimates.hpp"
#include "malin/solver.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace malin;

namespace {

PotentialPtr quadratic() { return PotentialSpec::quadratic(2).share(); }

// Unit square split along the diagonal (0,0)-(1,1).
MeshPtr two_triangles() {
  auto body = std::make_shared<const Polytope>(
      2, std::vector<Vector>{vec2(0, 0), vec2(1, 0), vec2(1, 1), vec2(0, 1)}, Provenance::Transformed, vec2(0.5, 0.5));
  return std::make_shared<const Mesh>(2, std::vector<Vector>{vec2(0, 0), vec2(1, 0), vec2(1, 1), vec2(0, 1)},
                                      std::vector<int>{0, 1, 2, 0, 2, 3}, std::vector<bool>(4, true), body);
}

MeshPtr disk_mesh(double target = 0.1) {
  return std::make_shared<const Mesh>(triangulate(malin::test::disk(256), target));
}

}  // namespace

TEST_CASE("two-triangle stiffness matches the hand assembly") {
  ProblemData data(quadratic());
  data.source_f = [](const Vector&) { return 1.0; };
  const LinearSystem sys = assemble(*two_triangles(), data, AssemblyForm::Divergence, false);
  Matrix expected(4, 4);
  expected << 1.0, -0.5, 0.0, -0.5,
              -0.5, 1.0, -0.5, 0.0,
              0.0, -0.5, 1.0, -0.5,
              -0.5, 0.0, -0.5, 1.0;
  CHECK((Matrix(sys.matrix) - expected).norm() < 1e-14);
  Vector load(4);
  load << 1.0 / 3, 1.0 / 6, 1.0 / 3, 1.0 / 6;
  CHECK((sys.load - load).norm() < 1e-14);

  // Dirichlet rows become identity rows carrying g.
  data.boundary_g = [](const Vector& x) { return 2.0 * x[0] + x[1]; };
  const LinearSystem d = assemble(*two_triangles(), data);
  CHECK((Matrix(d.matrix) - Matrix::Identity(4, 4)).norm() == 0.0);
  Vector g(4);
  g << 0.0, 2.0, 3.0, 1.0;
  CHECK((d.load - g).norm() == 0.0);
}

TEST_CASE("nonfinite coefficients are reported") {
  ProblemData data(quadratic());
  data.source_f = [](const Vector&) { return std::nan(""); };
  CHECK_THROWS_AS(assemble(*two_triangles(), data), AssemblyError);
}

TEST_CASE("zero data gives the zero solution") {
  ProblemData data(PotentialSpec::anisotropic(vec2(4, 0.25)).share());
  data.drift_b = [](const Vector& x) { return vec2(0.3, x[0]); };
  data.drift_B = [](const Vector& x) { return vec2(-0.1 * x[0], 0.0); };
  data.div_B = [](const Vector&) { return -0.1; };
  const SolveResult r = solve_dirichlet(disk_mesh(), data);
  CHECK(r.solution.values().lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("affine solutions are reproduced") {
  for (const auto& p : {quadratic(), PotentialSpec::anisotropic(vec2(4, 0.25)).share()}) {
    ProblemData data(p);
    data.boundary_g = [](const Vector& x) { return x[0] - 0.5 * x[1] + 2.0; };
    const SolveResult r = solve_dirichlet(disk_mesh(), data);
    const Mesh& m = r.solution.mesh();
    double err = 0.0;
    for (std::size_t i = 0; i < m.node_count(); ++i) {
      err = std::max(err, std::abs(r.solution[i] - (m.node(i)[0] - 0.5 * m.node(i)[1] + 2.0)));
    }
    CHECK(err < 1e-11);
    CHECK(r.residual <= 1e-10);
    CHECK(r.method == "SparseLU");
  }
}

TEST_CASE("maximum principle examples") {
  ProblemData five(quadratic());
  five.boundary_g = [](const Vector&) { return 5.0; };
  const SolveResult c = solve_dirichlet(disk_mesh(), five);
  CHECK((c.solution.values().array() - 5.0).abs().maxCoeff() < 1e-12);
  CHECK(maximum_principle_check(c, five).pass);

  ProblemData lin(quadratic());
  lin.boundary_g = [](const Vector& x) { return x[0]; };
  const SolveResult r = solve_dirichlet(disk_mesh(), lin);
  const MaximumPrincipleReport mp = maximum_principle_check(r, lin);
  CHECK(mp.pass);
  CHECK(mp.max_on_boundary);
  CHECK(mp.min_on_boundary);
  const Mesh& m = r.solution.mesh();
  CHECK((m.node(mp.argmax) - vec2(1, 0)).norm() < 1e-12);
  CHECK((m.node(mp.argmin) - vec2(-1, 0)).norm() < 1e-12);
}

TEST_CASE("maximum principle with random data and drift") {
  const auto p = PotentialSpec::perturbed(2, 0.1, vec2(1.3, 0.7)).share();
  const SectionSpec spec{p, Vector::Zero(2), 0.5};
  const MeshPtr mesh = mesh_section(spec, {});
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    ProblemData data(p);
    data.drift_b = [](const Vector&) { return vec2(0.3, 0.0); };
    const RandomBoundaryData g(2, seed, spec.center);
    data.boundary_g = g.field();
    const SolveResult r = solve_dirichlet(mesh, data);
    const MaximumPrincipleReport mp = maximum_principle_check(r, data);
    CHECK_MESSAGE(mp.pass, "seed " << seed << " violation " << mp.violation);
    CHECK(mp.max_value <= mp.boundary_max + 1e-8);
    CHECK(mp.min_value >= mp.boundary_min - 1e-8);
  }
}

TEST_CASE("maximum principle needs homogeneous data") {
  ProblemData data(quadratic());
  data.source_f = [](const Vector&) { return 1.0; };
  const SolveResult r = solve_dirichlet(disk_mesh(0.3), data);
  CHECK_THROWS_AS(maximum_principle_check(r, data), ContractError);
}

TEST_CASE("weak residual") {
  const MeshPtr mesh = disk_mesh(0.2);
  ProblemData data(PotentialSpec::anisotropic(vec2(2, 0.5)).share());
  data.drift_b = [](const Vector& x) { return vec2(0.2, 0.1 * x[1]); };
  data.source_f = [](const Vector& x) { return 1.0 + x[0]; };
  data.boundary_g = [](const Vector& x) { return x[1]; };
  const SolveResult r = solve_dirichlet(mesh, data);

  // Random test field vanishing on the boundary.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(mesh->node_count()));
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < mesh->node_count(); ++i) {
    if (mesh->on_boundary(i)) continue;
    v[static_cast<Eigen::Index>(i)] = u(rng);
    interior.push_back(i);
  }
  const DiscreteField test(mesh, v);
  CHECK(std::abs(weak_residual(r, data, test)) <= 1e-9 * r.solution.values().norm() * v.norm());
  CHECK(weak_residual(r, data, DiscreteField::zero(mesh)) == 0.0);

  // Bumping u at node j moves the residual by column j of the operator.
  REQUIRE(interior.size() >= 2);
  const std::size_t i = interior[0], j = interior[1];
  const LinearSystem sys = assemble(*mesh, data, AssemblyForm::Divergence, false);
  Vector bumped = r.solution.values();
  bumped[static_cast<Eigen::Index>(j)] += 1.0;
  Vector ei = Vector::Zero(v.size());
  ei[static_cast<Eigen::Index>(i)] = 1.0;
  const DiscreteField test_i(mesh, ei);
  const double delta =
      weak_residual(DiscreteField(mesh, bumped), data, test_i) - weak_residual(r.solution, data, test_i);
  CHECK(delta == doctest::Approx(sys.matrix.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
                     .epsilon(1e-10));

  Vector bad = v;
  for (std::size_t k = 0; k < mesh->node_count(); ++k) {
    if (mesh->on_boundary(k)) {
      bad[static_cast<Eigen::Index>(k)] = 1.0;
      break;
    }
  }
  CHECK_THROWS_AS(weak_residual(r, data, DiscreteField(mesh, bad)), ContractError);
}

TEST_CASE("div B certificate") {
  ProblemData data(quadratic());
  data.drift_B = [](const Vector& x) { return vec2(x[0], 0.0); };
  data.div_B = [](const Vector&) { return 1.0; };
  data.divB_certificate = DivergenceCertificate::sampled(1e-10);
  CHECK_THROWS_AS(validate_certificate(*disk_mesh(0.3), data), HypothesisError);
  CHECK_THROWS_AS(solve_dirichlet(disk_mesh(0.3), data), HypothesisError);

  data.drift_B = [](const Vector& x) { return vec2(-x[0], 0.0); };
  data.div_B = {};
  CHECK_NOTHROW(validate_certificate(*disk_mesh(0.3), data));
  CHECK(data.divergence_B(vec2(0.3, 0.2)) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("strong drift raises the Peclet warning") {
  ProblemData calm(quadratic());
  calm.drift_b = [](const Vector&) { return vec2(0.1, 0.0); };
  calm.boundary_g = [](const Vector& x) { return x[0]; };
  CHECK_FALSE(solve_dirichlet(disk_mesh(0.2), calm).peclet_warning);

  ProblemData strong(PotentialSpec::anisotropic(vec2(0.01, 100.0)).share());
  strong.drift_b = [](const Vector&) { return vec2(500.0, 0.0); };
  strong.boundary_g = [](const Vector& x) { return x[0]; };
  const SolveResult r = solve_dirichlet(disk_mesh(0.2), strong);
  CHECK(r.peclet_warning);
  CHECK(r.max_peclet > 2.0);
}

TEST_CASE("iterative path agrees with the direct solver") {
  ProblemData data(PotentialSpec::anisotropic(vec2(2, 0.5)).share());
  data.drift_b = [](const Vector&) { return vec2(0.3, 0.0); };
  data.source_f = [](const Vector& x) { return std::sin(x[0]) + 1.0; };
  const MeshPtr mesh = disk_mesh(0.1);
  const SolveResult direct = solve_dirichlet(mesh, data);
  SolveOptions opt;
  opt.direct_limit = 0;
  const SolveResult krylov = solve_dirichlet(mesh, data, opt);
  CHECK(krylov.method == "BiCGSTAB+ILUT");
  CHECK((direct.solution.values() - krylov.solution.values()).lpNorm<Eigen::Infinity>() <
        1e-7 * direct.solution.values().lpNorm<Eigen::Infinity>());
}

TEST_CASE("discrete fields") {
  const MeshPtr mesh = disk_mesh(0.3);
  CHECK_THROWS_AS(DiscreteField(mesh, Vector::Zero(3)), ContractError);
  const DiscreteField u = DiscreteField::interpolate(mesh, [](const Vector& x) { return 2.0 * x[0] - x[1]; });
  for (std::size_t k = 0; k < mesh->simplex_count(); ++k) CHECK((u.gradient(k) - vec2(2, -1)).norm() < 1e-12);
  const PointLocator loc(mesh);
  CHECK(loc.evaluate(u, vec2(0.3, 0.1)) == doctest::Approx(0.5).epsilon(1e-12));
  // Integral of 1 is the mesh area; of x^2 + y^2 over the polygon close to pi/2.
  CHECK(integrate(*mesh, [](const Vector&) { return 1.0; }) == doctest::Approx(mesh->total_measure()));
  CHECK(integrate(*mesh, [](const Vector& x) { return x.squaredNorm(); }) ==
        doctest::Approx(malin::test::pi / 2).epsilon(1e-3));
}
