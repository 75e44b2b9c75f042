#include "malin/errors.hpp"
#include "malin/mesh.hpp"
#include "malin/serialize.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace malin;

namespace {

// Independent conformity count: every edge is shared by one (boundary) or
// two (interior) triangles, and boundary edges join flagged nodes.
void check_edges(const Mesh& m) {
  std::map<std::pair<int, int>, int> uses;
  for (std::size_t k = 0; k < m.simplex_count(); ++k) {
    const auto s = m.simplex(k);
    for (int i = 0; i < 3; ++i) {
      int a = s[i], b = s[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      ++uses[{a, b}];
    }
  }
  for (const auto& [edge, count] : uses) {
    CHECK(count >= 1);
    CHECK(count <= 2);
    if (count == 1) {
      CHECK(m.on_boundary(edge.first));
      CHECK(m.on_boundary(edge.second));
    }
  }
}

double min_angle_deg(const Mesh& m) {
  double worst = 180.0;
  for (std::size_t k = 0; k < m.simplex_count(); ++k) {
    const auto s = m.simplex(k);
    for (int i = 0; i < 3; ++i) {
      const Vector u = m.node(s[(i + 1) % 3]) - m.node(s[i]);
      const Vector v = m.node(s[(i + 2) % 3]) - m.node(s[i]);
      worst = std::min(worst, std::acos(u.dot(v) / (u.norm() * v.norm())) * 180.0 / malin::test::pi);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("unit disk at target 0.1") {
  const Polytope disk = malin::test::disk(256);
  const Mesh m = triangulate(disk, 0.1);
  const MeshCheck c = check_mesh(m);
  CHECK_MESSAGE(c.ok, c.first_failure);
  // Every polygon vertex is a node, plus interior points.
  CHECK(m.node_count() >= 256);
  CHECK(m.node_count() <= 900);
  CHECK(c.min_measure > 0.0);
  CHECK(c.volume_defect < 1e-12);
  CHECK(m.total_measure() == doctest::Approx(disk.volume()).epsilon(1e-12));
  CHECK(min_angle_deg(m) >= 20.0);
  check_edges(m);
}

TEST_CASE("square at target 1") {
  const Mesh m = triangulate(malin::test::square(), 1.0);
  CHECK(check_mesh(m).ok);
  for (const Vector& p : m.nodes()) {
    CHECK(std::abs(p[0]) <= 1.0 + 1e-12);
    CHECK(std::abs(p[1]) <= 1.0 + 1e-12);
  }
  for (std::size_t k = 0; k < m.simplex_count(); ++k) CHECK(m.measure(k) > 0.0);
  CHECK(m.total_measure() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("thin ellipse at target 0.05") {
  const Mesh m = triangulate(malin::test::ellipse(0.5, 2.0, 256), 0.05);
  const MeshCheck c = check_mesh(m);
  CHECK_MESSAGE(c.ok, c.first_failure);
  CHECK(c.nonconforming_faces == 0);
  CHECK(c.misflagged_nodes == 0);
  CHECK(min_angle_deg(m) >= 20.0);
  check_edges(m);
}

TEST_CASE("uniform refinement") {
  const auto body = std::make_shared<const Polytope>(malin::test::random_polygon(7));
  const Mesh m0 = triangulate(body, 0.3);
  const Mesh m1 = refine(m0);
  const Mesh m2 = refine(m1);
  CHECK(m1.h_mesh() / m0.h_mesh() >= 0.45);
  CHECK(m1.h_mesh() / m0.h_mesh() <= 0.55);
  CHECK(m2.h_mesh() / m0.h_mesh() == doctest::Approx(0.25).epsilon(0.1));
  CHECK(m1.simplex_count() == 4 * m0.simplex_count());
  // Parent nodes keep their indices.
  for (std::size_t i = 0; i < m0.node_count(); ++i) {
    CHECK(m1.node(i) == m0.node(i));
    CHECK(m1.on_boundary(i) == m0.on_boundary(i));
  }
  CHECK(m2.total_measure() == doctest::Approx(m0.total_measure()).epsilon(1e-12));
  CHECK(check_mesh(m1).ok);
  CHECK(check_mesh(m2).ok);
  check_edges(m2);
}

TEST_CASE("3D ball") {
  const Polytope ball = malin::test::ball3(1.0, 200);
  const Mesh m = triangulate(ball, 0.3);
  const MeshCheck c = check_mesh(m);
  CHECK_MESSAGE(c.ok, c.first_failure);
  CHECK(m.total_measure() == doctest::Approx(ball.volume()).epsilon(1e-10));
  const Mesh r = refine(m);
  CHECK(r.simplex_count() == 8 * m.simplex_count());
  CHECK(check_mesh(r).ok);
  CHECK(r.total_measure() == doctest::Approx(ball.volume()).epsilon(1e-10));
}

TEST_CASE("meshing errors") {
  CHECK_THROWS_AS(triangulate(malin::test::disk(64), 1e-5), ResourceError);
  CHECK_THROWS_AS(triangulate(malin::test::disk(64), 0.0), ContractError);
  CHECK_THROWS_AS(triangulate(malin::test::disk(64), -1.0), ContractError);
}

TEST_CASE("mesh JSON round trip keeps the hash") {
  const Mesh m = triangulate(malin::test::disk(64), 0.3);
  const Mesh back = mesh_from_json(to_json(m));
  CHECK(back.hash() == m.hash());
  CHECK(back.node_count() == m.node_count());
  // The hash sees a moved node.
  std::vector<Vector> nodes = m.nodes();
  nodes[0][0] += 1e-9;
  const Mesh moved(2, nodes, m.connectivity(), m.boundary_flags(), m.body_ptr());
  CHECK(moved.hash() != m.hash());
}

TEST_CASE("triangulation is deterministic") {
  const Mesh a = triangulate(malin::test::ellipse(0.7, 1.3, 128), 0.1);
  const Mesh b = triangulate(malin::test::ellipse(0.7, 1.3, 128), 0.1);
  CHECK(a.hash() == b.hash());
}
