#include "malin/fields.hpp"

#include "malin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace malin {

SimplexGeometry simplex_geometry(const Mesh& mesh, std::size_t k) {
  const int n = mesh.dimension();
  const auto s = mesh.simplex(k);
  Matrix e(n, n);
  for (int j = 0; j < n; ++j) e.col(j) = mesh.node(s[j + 1]) - mesh.node(s[0]);
  SimplexGeometry g;
  const double det = e.determinant();
  g.measure = det / (n == 2 ? 2.0 : 6.0);
  const Matrix inv_t = e.inverse().transpose();
  g.gradients.resize(n, n + 1);
  g.gradients.rightCols(n) = inv_t;
  g.gradients.col(0) = -inv_t.rowwise().sum();
  g.centroid = Vector::Zero(n);
  for (int i = 0; i <= n; ++i) g.centroid += mesh.node(s[i]);
  g.centroid /= (n + 1);
  return g;
}

DiscreteField::DiscreteField(MeshPtr mesh, Vector values) : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw ContractError("discrete field needs a mesh");
  if (static_cast<std::size_t>(values_.size()) != mesh_->node_count()) {
    throw ContractError("value count differs from node count");
  }
}

DiscreteField DiscreteField::interpolate(MeshPtr mesh, const ScalarField& f) {
  Vector v(static_cast<Eigen::Index>(mesh->node_count()));
  for (std::size_t i = 0; i < mesh->node_count(); ++i) v[static_cast<Eigen::Index>(i)] = f(mesh->node(i));
  return DiscreteField(std::move(mesh), std::move(v));
}

DiscreteField DiscreteField::zero(MeshPtr mesh) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(mesh->node_count()));
  return DiscreteField(std::move(mesh), std::move(v));
}

Vector DiscreteField::gradient(std::size_t k) const {
  const SimplexGeometry g = simplex_geometry(*mesh_, k);
  const auto s = mesh_->simplex(k);
  Vector out = Vector::Zero(mesh_->dimension());
  for (int i = 0; i <= mesh_->dimension(); ++i) out += values_[s[i]] * g.gradients.col(i);
  return out;
}

double DiscreteField::at(std::size_t k, const Vector& bary) const {
  const auto s = mesh_->simplex(k);
  double v = 0.0;
  for (int i = 0; i < bary.size(); ++i) v += bary[i] * values_[s[i]];
  return v;
}

PointLocator::PointLocator(MeshPtr mesh) : mesh_(std::move(mesh)) {
  const int n = mesh_->dimension();
  const std::size_t count = mesh_->simplex_count();
  inverse_edges_.reserve(count);
  lower_ = mesh_->node(0);
  Vector upper = mesh_->node(0);
  for (const auto& x : mesh_->nodes()) {
    lower_ = lower_.cwiseMin(x);
    upper = upper.cwiseMax(x);
  }
  for (std::size_t k = 0; k < count; ++k) {
    const auto s = mesh_->simplex(k);
    Matrix e(n, n);
    for (int j = 0; j < n; ++j) e.col(j) = mesh_->node(s[j + 1]) - mesh_->node(s[0]);
    inverse_edges_.push_back(e.inverse());
  }
  const double per_axis = std::max(1.0, std::floor(std::pow(static_cast<double>(count), 1.0 / n)));
  const Vector extent = (upper - lower_).cwiseMax(1e-300);
  dims_.assign(n, static_cast<int>(per_axis));
  cell_size_ = extent / per_axis;
  std::size_t total = 1;
  for (int d : dims_) total *= static_cast<std::size_t>(d);
  buckets_.resize(total);
  for (std::size_t k = 0; k < count; ++k) {
    const auto s = mesh_->simplex(k);
    Vector lo = mesh_->node(s[0]), hi = mesh_->node(s[0]);
    for (int i = 1; i <= n; ++i) {
      lo = lo.cwiseMin(mesh_->node(s[i]));
      hi = hi.cwiseMax(mesh_->node(s[i]));
    }
    std::vector<int> a(n), b(n);
    for (int d = 0; d < n; ++d) {
      a[d] = std::clamp(static_cast<int>(std::floor((lo[d] - lower_[d]) / cell_size_[d])), 0, dims_[d] - 1);
      b[d] = std::clamp(static_cast<int>(std::floor((hi[d] - lower_[d]) / cell_size_[d])), 0, dims_[d] - 1);
    }
    std::vector<int> idx = a;
    while (true) {
      std::size_t flat = 0;
      for (int d = 0; d < n; ++d) flat = flat * dims_[d] + idx[d];
      buckets_[flat].push_back(k);
      int d = n - 1;
      while (d >= 0 && idx[d] == b[d]) {
        idx[d] = a[d];
        --d;
      }
      if (d < 0) break;
      ++idx[d];
    }
  }
}

Vector PointLocator::barycentric(std::size_t k, const Vector& x) const {
  const auto s = mesh_->simplex(k);
  const Vector t = inverse_edges_[k] * (x - mesh_->node(s[0]));
  Vector b(t.size() + 1);
  b[0] = 1.0 - t.sum();
  b.tail(t.size()) = t;
  return b;
}

std::size_t PointLocator::cell_index(const Vector& x) const {
  std::size_t flat = 0;
  for (int d = 0; d < x.size(); ++d) {
    const int i = std::clamp(static_cast<int>(std::floor((x[d] - lower_[d]) / cell_size_[d])), 0, dims_[d] - 1);
    flat = flat * dims_[d] + i;
  }
  return flat;
}

Location PointLocator::locate(const Vector& x) const {
  constexpr double slack = 1e-12;
  Location best;
  double best_min = -std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t k) {
    Vector b = barycentric(k, x);
    const double m = b.minCoeff();
    if (m > best_min) {
      best_min = m;
      best.simplex = k;
      best.barycentric = std::move(b);
    }
  };
  for (std::size_t k : buckets_[cell_index(x)]) {
    consider(k);
    if (best_min >= -slack) break;
  }
  if (best_min < -slack) {
    for (std::size_t k = 0; k < mesh_->simplex_count(); ++k) consider(k);
  }
  best.inside = best_min >= -slack;
  if (!best.inside || best_min < 0.0) {
    best.barycentric = best.barycentric.cwiseMax(0.0);
    best.barycentric /= best.barycentric.sum();
  }
  return best;
}

double PointLocator::evaluate(const DiscreteField& field, const Vector& x) const {
  const Location loc = locate(x);
  return field.at(loc.simplex, loc.barycentric);
}

namespace {

// Rule on the reference simplex repeated over `levels` uniform subdivisions
// (red for triangles, an eight-way split for tetrahedra).
QuadratureRule composite_rule(int n, int degree, int levels) {
  using Simplex = std::vector<Vector>;  // barycentric vertices
  std::vector<Simplex> cells(1);
  for (int i = 0; i <= n; ++i) cells[0].push_back(Vector::Unit(n + 1, i));
  for (int l = 0; l < levels; ++l) {
    std::vector<Simplex> next;
    for (const auto& c : cells) {
      auto m = [&](int a, int b) { return Vector(0.5 * (c[a] + c[b])); };
      if (n == 2) {
        next.push_back({c[0], m(0, 1), m(0, 2)});
        next.push_back({m(0, 1), c[1], m(1, 2)});
        next.push_back({m(0, 2), m(1, 2), c[2]});
        next.push_back({m(0, 1), m(1, 2), m(0, 2)});
      } else {
        next.push_back({c[0], m(0, 1), m(0, 2), m(0, 3)});
        next.push_back({m(0, 1), c[1], m(1, 2), m(1, 3)});
        next.push_back({m(0, 2), m(1, 2), c[2], m(2, 3)});
        next.push_back({m(0, 3), m(1, 3), m(2, 3), c[3]});
        next.push_back({m(0, 1), m(0, 2), m(0, 3), m(1, 3)});
        next.push_back({m(0, 1), m(0, 2), m(1, 2), m(1, 3)});
        next.push_back({m(0, 2), m(0, 3), m(1, 3), m(2, 3)});
        next.push_back({m(0, 2), m(1, 2), m(1, 3), m(2, 3)});
      }
    }
    cells = std::move(next);
  }
  const QuadratureRule base = simplex_rule(n, degree);
  QuadratureRule out;
  const double share = 1.0 / static_cast<double>(cells.size());
  for (const auto& c : cells) {
    for (std::size_t q = 0; q < base.points.size(); ++q) {
      Vector b = Vector::Zero(n + 1);
      for (int i = 0; i <= n; ++i) b += base.points[q][i] * c[i];
      out.points.push_back(b);
      out.weights.push_back(share * base.weights[q]);
    }
  }
  return out;
}

// Visits (simplex, barycentric, point, weight). With a region, simplices
// whose vertices disagree about membership use a composite rule so that the
// cut is resolved below the mesh size.
template <class Visit>
void for_each_quadrature_point(const Mesh& mesh, int degree, Visit&& visit, const Region& region = {}) {
  const int n = mesh.dimension();
  const QuadratureRule rule = simplex_rule(n, degree);
  const QuadratureRule fine = region ? composite_rule(n, std::min(degree, 2), n == 2 ? 3 : 2) : QuadratureRule{};
  Vector x(n);
  for (std::size_t k = 0; k < mesh.simplex_count(); ++k) {
    const auto s = mesh.simplex(k);
    const double vol = mesh.measure(k);
    const QuadratureRule* use = &rule;
    if (region) {
      int in = 0;
      for (int i = 0; i <= n; ++i) in += region(mesh.node(s[i])) ? 1 : 0;
      if (in != n + 1) use = &fine;
    }
    for (std::size_t q = 0; q < use->points.size(); ++q) {
      const Vector& b = use->points[q];
      x.setZero();
      for (int i = 0; i <= n; ++i) x += b[i] * mesh.node(s[i]);
      if (region && use == &fine && !region(x)) continue;
      visit(k, b, x, vol * use->weights[q]);
    }
  }
}

}  // namespace

double integrate(const DiscreteField& u, const std::function<double(const Vector&, double)>& g,
                 const Region& region, int degree) {
  double total = 0.0;
  for_each_quadrature_point(
      u.mesh(), degree, [&](std::size_t k, const Vector& b, const Vector& x, double w) { total += w * g(x, u.at(k, b)); },
      region);
  return total;
}

double integrate(const Mesh& mesh, const ScalarField& f, const Region& region, int degree) {
  double total = 0.0;
  for_each_quadrature_point(
      mesh, degree, [&](std::size_t, const Vector&, const Vector& x, double w) { total += w * f(x); }, region);
  return total;
}

double linf_norm(const DiscreteField& u, const Region& region) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (region && !region(u.mesh().node(i))) continue;
    m = std::max(m, std::abs(u[i]));
  }
  return m;
}

namespace {

// (sum w |v|^p)^{1/p} computed as scale * (sum w (|v|/scale)^p)^{1/p} so that
// large exponents neither overflow nor underflow.
template <class Sample>
double scaled_lp(Sample&& sample, double p) {
  double scale = 0.0;
  sample([&](double, double v) { scale = std::max(scale, std::abs(v)); });
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  sample([&](double w, double v) { s += w * std::pow(std::abs(v) / scale, p); });
  return scale * std::pow(s, 1.0 / p);
}

}  // namespace

double lp_norm(const DiscreteField& u, double p, const Region& region, int degree) {
  if (std::isinf(p)) return linf_norm(u, region);
  if (!(p > 0.0)) throw ContractError("norm exponent must be positive");
  return scaled_lp(
      [&](auto&& emit) {
        for_each_quadrature_point(
            u.mesh(), degree, [&](std::size_t k, const Vector& b, const Vector&, double w) { emit(w, u.at(k, b)); },
            region);
      },
      p);
}

double lp_norm(const Mesh& mesh, const ScalarField& f, double p, const Region& region, int degree) {
  if (std::isinf(p)) return sup_norm(mesh, f, region);
  if (!(p > 0.0)) throw ContractError("norm exponent must be positive");
  return scaled_lp(
      [&](auto&& emit) {
        for_each_quadrature_point(
            mesh, degree, [&](std::size_t, const Vector&, const Vector& x, double w) { emit(w, f(x)); }, region);
      },
      p);
}

double sup_norm(const Mesh& mesh, const VectorField& F, const Region& region) {
  if (!F) return 0.0;
  double m = 0.0;
  auto visit = [&](const Vector& x) {
    if (region && !region(x)) return;
    m = std::max(m, F(x).norm());
  };
  for (const auto& x : mesh.nodes()) visit(x);
  for_each_quadrature_point(mesh, 4, [&](std::size_t, const Vector&, const Vector& x, double) { visit(x); });
  return m;
}

double sup_norm(const Mesh& mesh, const ScalarField& f, const Region& region) {
  if (!f) return 0.0;
  double m = 0.0;
  auto visit = [&](const Vector& x) {
    if (region && !region(x)) return;
    m = std::max(m, std::abs(f(x)));
  };
  for (const auto& x : mesh.nodes()) visit(x);
  for_each_quadrature_point(mesh, 4, [&](std::size_t, const Vector&, const Vector& x, double) { visit(x); });
  return m;
}

double energy(const DiscreteField& u, const std::function<Matrix(const Vector&)>& phi, int degree) {
  const Mesh& mesh = u.mesh();
  const QuadratureRule rule = simplex_rule(mesh.dimension(), degree);
  double total = 0.0;
  for (std::size_t k = 0; k < mesh.simplex_count(); ++k) {
    const SimplexGeometry g = simplex_geometry(mesh, k);
    const Vector du = u.gradient(k);
    const auto s = mesh.simplex(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      Vector x = Vector::Zero(mesh.dimension());
      for (int i = 0; i <= mesh.dimension(); ++i) x += rule.points[q][i] * mesh.node(s[i]);
      total += g.measure * rule.weights[q] * du.dot(phi(x) * du);
    }
  }
  return total;
}

double h1_seminorm_error(const DiscreteField& u, const VectorField& exact_gradient, int degree) {
  const Mesh& mesh = u.mesh();
  const QuadratureRule rule = simplex_rule(mesh.dimension(), degree);
  double total = 0.0;
  for (std::size_t k = 0; k < mesh.simplex_count(); ++k) {
    const Vector du = u.gradient(k);
    const auto s = mesh.simplex(k);
    const double vol = mesh.measure(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      Vector x = Vector::Zero(mesh.dimension());
      for (int i = 0; i <= mesh.dimension(); ++i) x += rule.points[q][i] * mesh.node(s[i]);
      total += vol * rule.weights[q] * (exact_gradient(x) - du).squaredNorm();
    }
  }
  return std::sqrt(total);
}

double l2_error(const DiscreteField& u, const ScalarField& exact, int degree) {
  const double s = integrate(
      u, [&](const Vector& x, double v) { const double d = v - exact(x); return d * d; }, {}, degree);
  return std::sqrt(s);
}

}  // namespace malin
