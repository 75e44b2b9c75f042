#pragma once

#include "malin/mesh.hpp"
#include "malin/quadrature.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace malin {

using MeshPtr = std::shared_ptr<const Mesh>;

// Barycentric gradients (columns, n x (n+1)), measure and centroid of one
// simplex. P1 gradients are constant per simplex.
struct SimplexGeometry {
  double measure = 0.0;
  Matrix gradients;
  Vector centroid;
};

SimplexGeometry simplex_geometry(const Mesh& mesh, std::size_t k);

// Continuous piecewise linear field: one value per mesh node.
class DiscreteField {
 public:
  DiscreteField(MeshPtr mesh, Vector values);

  static DiscreteField interpolate(MeshPtr mesh, const ScalarField& f);
  static DiscreteField zero(MeshPtr mesh);

  int order() const { return 1; }
  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const Vector& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  // Gradient on simplex k.
  Vector gradient(std::size_t k) const;
  // Value at barycentric coordinates of simplex k.
  double at(std::size_t k, const Vector& barycentric) const;

 private:
  MeshPtr mesh_;
  Vector values_;
};

// Simplex containing x with its barycentric coordinates. Points outside the
// mesh snap to the closest simplex with clamped coordinates.
struct Location {
  std::size_t simplex = 0;
  Vector barycentric;
  bool inside = false;
};

class PointLocator {
 public:
  explicit PointLocator(MeshPtr mesh);

  Location locate(const Vector& x) const;
  double evaluate(const DiscreteField& field, const Vector& x) const;
  const Mesh& mesh() const { return *mesh_; }

 private:
  Vector barycentric(std::size_t k, const Vector& x) const;
  std::size_t cell_index(const Vector& x) const;

  MeshPtr mesh_;
  std::vector<Matrix> inverse_edges_;
  Vector lower_;
  Vector cell_size_;
  std::vector<int> dims_;
  std::vector<std::vector<std::size_t>> buckets_;
};

// Pointwise restriction used for integrals over a subregion (for example a
// smaller section inside the meshed one). Empty means the whole mesh.
using Region = std::function<bool(const Vector&)>;

// Sum over simplices of the rule applied to g(x, u(x)).
double integrate(const DiscreteField& u, const std::function<double(const Vector&, double)>& g,
                 const Region& region = {}, int degree = 4);
double integrate(const Mesh& mesh, const ScalarField& f, const Region& region = {}, int degree = 4);

// ||u||_{L^p}; p = infinity gives the largest nodal magnitude (in the
// region when one is given).
double lp_norm(const DiscreteField& u, double p, const Region& region = {}, int degree = 4);
double lp_norm(const Mesh& mesh, const ScalarField& f, double p, const Region& region = {}, int degree = 4);
double linf_norm(const DiscreteField& u, const Region& region = {});

// Largest |F| over quadrature points of the mesh (sup norm of a vector field).
double sup_norm(const Mesh& mesh, const VectorField& F, const Region& region = {});
double sup_norm(const Mesh& mesh, const ScalarField& f, const Region& region = {});

// int Phi Du . Du and the H^1 seminorm of u - exact.
double energy(const DiscreteField& u, const std::function<Matrix(const Vector&)>& phi, int degree = 2);
double h1_seminorm_error(const DiscreteField& u, const VectorField& exact_gradient, int degree = 4);
double l2_error(const DiscreteField& u, const ScalarField& exact, int degree = 4);

}  // namespace malin
