#pragma once

#include "malin/affine.hpp"
#include "malin/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace malin {

enum class Provenance { SectionLevelSet, Transformed };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

// Supporting half-space normal . x <= offset with unit outward normal.
struct Facet {
  Vector normal;
  double offset = 0.0;
};

// Convex body carried by its boundary vertices. For n = 2 the vertices form
// a counter-clockwise loop; for n = 3 they are surface samples and the hull
// triangulation is computed at construction.
class Polytope {
 public:
  Polytope(int n, std::vector<Vector> vertices, Provenance provenance, Vector interior_point);

  int dimension() const { return n_; }
  const std::vector<Vector>& vertices() const { return vertices_; }
  // Outward-oriented hull triangles (n = 3 only).
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Facet>& facets() const { return facets_; }
  Provenance provenance() const { return provenance_; }
  const Vector& interior_point() const { return interior_; }

  double support(const Vector& direction) const;
  double volume() const;
  bool contains(const Vector& x, double tolerance = 1e-12) const;
  // min over facets of (offset - normal . x); positive inside.
  double boundary_distance(const Vector& x) const;
  // Distance along `direction` (unit) from `origin` to the boundary.
  double radial_distance(const Vector& origin, const Vector& direction) const;
  double max_vertex_distance(const Vector& p) const;
  double diameter() const;

  // Largest distance of a vertex from the boundary of the convex hull of
  // all vertices; zero for a body in convex position.
  double convexity_defect() const;

  // Image of the body under `map`.
  Polytope transformed(const AffineMap& map) const;

 private:
  void build_facets();

  int n_;
  std::vector<Vector> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Facet> facets_;
  Provenance provenance_;
  Vector interior_;
};

// Outward hull triangles of a 3D point cloud (incremental construction).
// Throws ContractError when the points are coplanar.
std::vector<std::array<int, 3>> convex_hull_3d(const std::vector<Vector>& points);

// Counter-clockwise hull of planar points (monotone chain), as indices.
std::vector<int> convex_hull_2d(const std::vector<Vector>& points);

// Roughly uniform unit directions: equispaced angles for n = 2, a Fibonacci
// lattice for n = 3.
std::vector<Vector> sphere_directions(int n, int count);

}  // namespace malin
