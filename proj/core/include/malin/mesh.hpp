#pragma once

#include "malin/polytope.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace malin {

// Conforming simplicial mesh of a convex body. Immutable once built.
class Mesh {
 public:
  Mesh(int n, std::vector<Vector> nodes, std::vector<int> connectivity, std::vector<bool> boundary,
       std::shared_ptr<const Polytope> body);

  int dimension() const { return n_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t simplex_count() const { return connectivity_.size() / (n_ + 1); }

  const std::vector<Vector>& nodes() const { return nodes_; }
  const Vector& node(std::size_t i) const { return nodes_[i]; }
  std::span<const int> simplex(std::size_t k) const {
    return {connectivity_.data() + k * (n_ + 1), static_cast<std::size_t>(n_ + 1)};
  }
  const std::vector<int>& connectivity() const { return connectivity_; }
  const std::vector<bool>& boundary_flags() const { return boundary_; }
  bool on_boundary(std::size_t i) const { return boundary_[i]; }

  double h_mesh() const { return h_mesh_; }
  // Signed measure of simplex k (positive for valid meshes).
  double measure(std::size_t k) const;
  double total_measure() const;
  // Largest edge of simplex k.
  double diameter(std::size_t k) const;

  const Polytope& body() const { return *body_; }
  const std::shared_ptr<const Polytope>& body_ptr() const { return body_; }

  // FNV-1a over nodes, connectivity and flags.
  std::uint64_t hash() const;

 private:
  int n_;
  std::vector<Vector> nodes_;
  std::vector<int> connectivity_;
  std::vector<bool> boundary_;
  std::shared_ptr<const Polytope> body_;
  double h_mesh_ = 0.0;
};

struct TriangulateOptions {
  double min_angle_deg = 20.5;
  std::size_t max_nodes = 1'500'000;
};

// n = 2: quality constrained Delaunay of the polygon (every polygon vertex
// is a mesh node). n = 3: layered tetrahedra between homothetic copies of
// the hull surface, coned to the interior point at the center. Throws ResourceError when the estimated node count exceeds the
// budget.
Mesh triangulate(const Polytope& body, double target_size, const TriangulateOptions& options = {});
Mesh triangulate(std::shared_ptr<const Polytope> body, double target_size,
                 const TriangulateOptions& options = {});

// Uniform refinement: red refinement for triangles, Bey's eight-way split
// (shortest interior diagonal) for tetrahedra. Parent nodes keep their
// indices.
Mesh refine(const Mesh& mesh);

// Independent re-check of the structural invariants.
struct MeshCheck {
  bool ok = false;
  double min_measure = 0.0;
  std::size_t misflagged_nodes = 0;
  std::size_t nonconforming_faces = 0;  // interior faces not shared by exactly two simplices
  std::size_t outside_nodes = 0;
  double min_angle_deg = 0.0;          // n = 2 only
  double max_diameter = 0.0;
  double volume_defect = 0.0;          // |sum of measures - body volume| / body volume
  std::string first_failure;
};

MeshCheck check_mesh(const Mesh& mesh, double boundary_tolerance = 1e-9);

}  // namespace malin
