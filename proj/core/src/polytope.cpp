#include "malin/polytope.hpp"

#include "malin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

namespace malin {

namespace {

double cross2(const Vector& a, const Vector& b) { return a[0] * b[1] - a[1] * b[0]; }

double signed_area(const std::vector<Vector>& loop) {
  double s = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    s += cross2(loop[i], loop[(i + 1) % loop.size()]);
  }
  return 0.5 * s;
}

Eigen::Vector3d as3(const Vector& v) { return {v[0], v[1], v[2]}; }

}  // namespace

std::string to_string(Provenance p) {
  return p == Provenance::SectionLevelSet ? "SectionLevelSet" : "Transformed";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "SectionLevelSet") return Provenance::SectionLevelSet;
  if (s == "Transformed") return Provenance::Transformed;
  throw ContractError("unknown polytope provenance '" + s + "'");
}

Polytope::Polytope(int n, std::vector<Vector> vertices, Provenance provenance, Vector interior_point)
    : n_(n), vertices_(std::move(vertices)), provenance_(provenance), interior_(std::move(interior_point)) {
  if (n_ != 2 && n_ != 3) throw ContractError("polytope dimension must be 2 or 3");
  if (static_cast<int>(vertices_.size()) < n_ + 1) throw ContractError("polytope needs at least n+1 vertices");
  for (const auto& v : vertices_) {
    if (v.size() != n_ || !v.allFinite()) throw ContractError("polytope vertex has wrong dimension or is not finite");
  }
  if (n_ == 2) {
    const double area = signed_area(vertices_);
    if (std::abs(area) == 0.0) throw ContractError("degenerate polygon");
    if (area < 0) std::reverse(vertices_.begin(), vertices_.end());
  } else {
    triangles_ = convex_hull_3d(vertices_);
  }
  build_facets();
  if (!(boundary_distance(interior_) > 0.0)) {
    throw ContractError("polytope does not contain its declared interior point");
  }
}

void Polytope::build_facets() {
  facets_.clear();
  if (n_ == 2) {
    const std::size_t m = vertices_.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Vector& a = vertices_[i];
      const Vector& b = vertices_[(i + 1) % m];
      Vector e = b - a;
      const double len = e.norm();
      if (len == 0.0) continue;
      Vector nrm = vec2(e[1], -e[0]) / len;  // outward for CCW loops
      facets_.push_back({nrm, nrm.dot(a)});
    }
  } else {
    for (const auto& t : triangles_) {
      const Eigen::Vector3d a = as3(vertices_[t[0]]), b = as3(vertices_[t[1]]), c = as3(vertices_[t[2]]);
      Eigen::Vector3d nrm = (b - a).cross(c - a);
      const double len = nrm.norm();
      if (len == 0.0) continue;
      nrm /= len;
      Vector nv = Vector(nrm);
      facets_.push_back({nv, nrm.dot(a)});
    }
  }
}

double Polytope::support(const Vector& u) const {
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) s = std::max(s, u.dot(v));
  return s;
}

double Polytope::volume() const {
  if (n_ == 2) return signed_area(vertices_);
  double vol = 0.0;
  const Eigen::Vector3d o = as3(interior_);
  for (const auto& t : triangles_) {
    const Eigen::Vector3d a = as3(vertices_[t[0]]) - o, b = as3(vertices_[t[1]]) - o,
                          c = as3(vertices_[t[2]]) - o;
    vol += a.dot(b.cross(c)) / 6.0;
  }
  return vol;
}

double Polytope::boundary_distance(const Vector& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& f : facets_) d = std::min(d, f.offset - f.normal.dot(x));
  return d;
}

bool Polytope::contains(const Vector& x, double tolerance) const { return boundary_distance(x) >= -tolerance; }

double Polytope::radial_distance(const Vector& origin, const Vector& direction) const {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& f : facets_) {
    const double nd = f.normal.dot(direction);
    if (nd > 0.0) t = std::min(t, (f.offset - f.normal.dot(origin)) / nd);
  }
  return t;
}

double Polytope::max_vertex_distance(const Vector& p) const {
  double r = 0.0;
  for (const auto& v : vertices_) r = std::max(r, (v - p).norm());
  return r;
}

double Polytope::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
      d = std::max(d, (vertices_[i] - vertices_[j]).norm());
    }
  }
  return d;
}

double Polytope::convexity_defect() const {
  std::vector<Facet> hull;
  if (n_ == 2) {
    const auto idx = convex_hull_2d(vertices_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const Vector& a = vertices_[idx[i]];
      const Vector& b = vertices_[idx[(i + 1) % idx.size()]];
      Vector e = b - a;
      Vector nrm = vec2(e[1], -e[0]) / e.norm();
      hull.push_back({nrm, nrm.dot(a)});
    }
  } else {
    hull = facets_;
  }
  double worst = 0.0;
  for (const auto& v : vertices_) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& f : hull) d = std::min(d, f.offset - f.normal.dot(v));
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

Polytope Polytope::transformed(const AffineMap& map) const {
  std::vector<Vector> mapped;
  mapped.reserve(vertices_.size());
  for (const auto& v : vertices_) mapped.push_back(map.apply(v));
  return Polytope(n_, std::move(mapped), Provenance::Transformed, map.apply(interior_));
}

std::vector<int> convex_hull_2d(const std::vector<Vector>& points) {
  std::vector<int> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return points[a][0] < points[b][0] || (points[a][0] == points[b][0] && points[a][1] < points[b][1]);
  });
  auto turn = [&](int o, int a, int b) { return cross2(points[a] - points[o], points[b] - points[o]); };
  std::vector<int> hull(2 * order.size());
  std::size_t k = 0;
  for (int i : order) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], i) <= 0) --k;
    hull[k++] = i;
  }
  for (std::size_t j = order.size() - 1, t = k + 1; j-- > 0;) {
    const int i = order[j];
    while (k >= t && turn(hull[k - 2], hull[k - 1], i) <= 0) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<std::array<int, 3>> convex_hull_3d(const std::vector<Vector>& pts) {
  const int m = static_cast<int>(pts.size());
  std::vector<Eigen::Vector3d> p(m);
  double scale = 0.0;
  for (int i = 0; i < m; ++i) {
    p[i] = as3(pts[i]);
    scale = std::max(scale, p[i].cwiseAbs().maxCoeff());
  }
  const double eps = 1e-12 * std::max(scale, 1e-300);

  // initial simplex from extreme points
  int i0 = 0, i1 = 0, i2 = -1, i3 = -1;
  for (int i = 0; i < m; ++i) if ((p[i] - p[i0]).norm() > (p[i1] - p[i0]).norm()) i1 = i;
  double best = 0.0;
  for (int i = 0; i < m; ++i) {
    const double d = (p[i] - p[i0]).cross(p[i1] - p[i0]).norm();
    if (d > best) { best = d; i2 = i; }
  }
  if (i2 < 0 || best <= eps * scale) throw ContractError("points are collinear; no 3D hull");
  const Eigen::Vector3d n012 = (p[i1] - p[i0]).cross(p[i2] - p[i0]);
  best = 0.0;
  for (int i = 0; i < m; ++i) {
    const double d = std::abs(n012.dot(p[i] - p[i0]));
    if (d > best) { best = d; i3 = i; }
  }
  if (i3 < 0 || best <= eps * n012.norm()) throw ContractError("points are coplanar; no 3D hull");

  struct Face {
    std::array<int, 3> v;
    Eigen::Vector3d normal;
    double offset;
    bool alive;
  };
  const Eigen::Vector3d inside = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;
  std::vector<Face> faces;
  auto add_face = [&](int a, int b, int c) {
    Eigen::Vector3d nrm = (p[b] - p[a]).cross(p[c] - p[a]);
    if (nrm.dot(inside - p[a]) > 0) {
      std::swap(b, c);
      nrm = -nrm;
    }
    nrm.normalize();
    faces.push_back({{a, b, c}, nrm, nrm.dot(p[a]), true});
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);

  for (int q = 0; q < m; ++q) {
    if (q == i0 || q == i1 || q == i2 || q == i3) continue;
    std::vector<std::size_t> visible;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && faces[f].normal.dot(p[q]) - faces[f].offset > eps) visible.push_back(f);
    }
    if (visible.empty()) continue;
    std::set<std::pair<int, int>> edges;
    for (auto f : visible) {
      const auto& v = faces[f].v;
      for (int k = 0; k < 3; ++k) edges.insert({v[k], v[(k + 1) % 3]});
      faces[f].alive = false;
    }
    for (const auto& [a, b] : edges) {
      if (edges.count({b, a})) continue;  // interior edge of the visible cap
      Eigen::Vector3d nrm = (p[b] - p[a]).cross(p[q] - p[a]);
      const double len = nrm.norm();
      if (len == 0.0) continue;
      nrm /= len;
      faces.push_back({{a, b, q}, nrm, nrm.dot(p[a]), true});
    }
  }

  std::vector<std::array<int, 3>> out;
  for (const auto& f : faces) if (f.alive) out.push_back(f.v);
  return out;
}

std::vector<Vector> sphere_directions(int n, int count) {
  std::vector<Vector> dirs;
  dirs.reserve(count);
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      dirs.push_back(vec2(std::cos(th), std::sin(th)));
    }
  } else {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = golden * k;
      dirs.push_back(vec3(r * std::cos(th), r * std::sin(th), z));
    }
  }
  return dirs;
}

}  // namespace malin
