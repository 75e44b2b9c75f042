#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <vector>

namespace malin::detail {

struct PlanarMesh {
  std::vector<Eigen::Vector2d> points;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<bool> boundary;
};

struct PlanarMeshOptions {
  double target_size = 0.1;
  double min_angle_deg = 20.5;
  double lattice_factor = 1.5;    // interior seed spacing relative to target; 0 disables seeding
  double clearance_factor = 0.5;  // seeds closer than this * spacing to the boundary are dropped
  double max_edge_factor = 1.9;   // split triangles with an edge above factor * target
  bool off_centers = true;        // insert off-centers instead of circumcenters where closer
  std::size_t max_points = 2'000'000;
};

// Quality constrained Delaunay triangulation of a convex polygon given as a
// counter-clockwise loop. Every loop vertex is kept; long loop edges are
// subdivided; the interior is seeded with a hexagonal lattice through
// `center` and then refined by circumcenter insertion until no angle is
// below the bound.
PlanarMesh triangulate_convex_polygon(const std::vector<Eigen::Vector2d>& loop,
                                      const Eigen::Vector2d& center, const PlanarMeshOptions& options);

}  // namespace malin::detail
