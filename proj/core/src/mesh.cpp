#include "malin/mesh.hpp"

#include "delaunay.hpp"
#include "malin/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

namespace malin {

namespace {

double simplex_measure(const std::vector<Vector>& nodes, std::span<const int> s, int n) {
  Matrix e(n, n);
  for (int j = 0; j < n; ++j) e.col(j) = nodes[s[j + 1]] - nodes[s[0]];
  return e.determinant() / (n == 2 ? 2.0 : 6.0);
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

constexpr std::uint64_t fnv_offset = 1469598103934665603ULL;
constexpr std::uint64_t fnv_prime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= fnv_prime;
  }
}

}  // namespace

Mesh::Mesh(int n, std::vector<Vector> nodes, std::vector<int> connectivity, std::vector<bool> boundary,
           std::shared_ptr<const Polytope> body)
    : n_(n), nodes_(std::move(nodes)), connectivity_(std::move(connectivity)), boundary_(std::move(boundary)),
      body_(std::move(body)) {
  if (n_ != 2 && n_ != 3) throw ContractError("mesh dimension must be 2 or 3");
  if (connectivity_.size() % (n_ + 1) != 0) throw ContractError("connectivity length is not a multiple of n+1");
  if (boundary_.size() != nodes_.size()) throw ContractError("boundary flag count differs from node count");
  for (int idx : connectivity_) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= nodes_.size()) throw ContractError("simplex index out of range");
  }
  for (std::size_t k = 0; k < simplex_count(); ++k) h_mesh_ = std::max(h_mesh_, diameter(k));
}

double Mesh::measure(std::size_t k) const { return simplex_measure(nodes_, simplex(k), n_); }

double Mesh::total_measure() const {
  double s = 0.0;
  for (std::size_t k = 0; k < simplex_count(); ++k) s += measure(k);
  return s;
}

double Mesh::diameter(std::size_t k) const {
  const auto s = simplex(k);
  double d = 0.0;
  for (int i = 0; i <= n_; ++i) {
    for (int j = i + 1; j <= n_; ++j) d = std::max(d, (nodes_[s[i]] - nodes_[s[j]]).norm());
  }
  return d;
}

std::uint64_t Mesh::hash() const {
  std::uint64_t h = fnv_offset;
  fnv_bytes(h, &n_, sizeof n_);
  for (const auto& x : nodes_) fnv_bytes(h, x.data(), sizeof(double) * x.size());
  fnv_bytes(h, connectivity_.data(), sizeof(int) * connectivity_.size());
  for (bool b : boundary_) {
    const unsigned char c = b ? 1 : 0;
    fnv_bytes(h, &c, 1);
  }
  return h;
}

namespace {

Mesh triangulate_2d(std::shared_ptr<const Polytope> body, double target, const TriangulateOptions& opt) {
  std::vector<Eigen::Vector2d> loop;
  loop.reserve(body->vertices().size());
  for (const auto& v : body->vertices()) loop.emplace_back(v[0], v[1]);
  const Vector& c = body->interior_point();

  double perimeter = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) perimeter += (loop[(i + 1) % loop.size()] - loop[i]).norm();
  const double estimate = body->volume() * 2.0 / (std::sqrt(3.0) * target * target) * 1.3 +
                          perimeter / target + static_cast<double>(loop.size());
  if (estimate > static_cast<double>(opt.max_nodes)) {
    throw ResourceError("target size " + std::to_string(target) + " needs about " +
                            std::to_string(static_cast<long long>(estimate)) + " nodes",
                        estimate);
  }

  detail::PlanarMeshOptions po;
  po.target_size = target;
  po.min_angle_deg = opt.min_angle_deg;
  po.max_points = std::max<std::size_t>(opt.max_nodes, 4 * static_cast<std::size_t>(estimate));
  const detail::PlanarMesh pm = detail::triangulate_convex_polygon(loop, Eigen::Vector2d(c[0], c[1]), po);

  std::vector<Vector> nodes;
  nodes.reserve(pm.points.size());
  for (const auto& p : pm.points) nodes.push_back(vec2(p.x(), p.y()));
  std::vector<int> conn;
  conn.reserve(pm.triangles.size() * 3);
  for (const auto& t : pm.triangles) conn.insert(conn.end(), t.begin(), t.end());
  return Mesh(2, std::move(nodes), std::move(conn), pm.boundary, std::move(body));
}

Mesh triangulate_3d(std::shared_ptr<const Polytope> body, double target, const TriangulateOptions& opt) {
  const Vector& c = body->interior_point();
  const double outer = body->max_vertex_distance(c);

  // surface: hull triangles, red-refined until every edge is below target
  std::vector<Vector> surf = body->vertices();
  std::vector<std::array<int, 3>> faces = body->triangles();
  auto longest = [&]() {
    double e = 0.0;
    for (const auto& f : faces) {
      for (int i = 0; i < 3; ++i) e = std::max(e, (surf[f[i]] - surf[f[(i + 1) % 3]]).norm());
    }
    return e;
  };
  const int layers = std::max(1, static_cast<int>(std::ceil(outer / target)));
  while (longest() > target) {
    const double estimate = 4.0 * static_cast<double>(surf.size()) * layers;
    if (estimate > static_cast<double>(opt.max_nodes)) {
      throw ResourceError("target size " + std::to_string(target) + " needs about " +
                              std::to_string(static_cast<long long>(estimate)) + " nodes",
                          estimate);
    }
    std::unordered_map<std::uint64_t, int> mids;
    auto mid = [&](int a, int b) {
      const auto key = edge_key(a, b);
      auto it = mids.find(key);
      if (it != mids.end()) return it->second;
      surf.push_back(0.5 * (surf[a] + surf[b]));
      const int idx = static_cast<int>(surf.size()) - 1;
      mids.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({ab, f[1], bc});
      next.push_back({ca, bc, f[2]});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  const double estimate = static_cast<double>(surf.size()) * layers + 1.0;
  if (estimate > static_cast<double>(opt.max_nodes)) {
    throw ResourceError("target size " + std::to_string(target) + " needs about " +
                            std::to_string(static_cast<long long>(estimate)) + " nodes",
                        estimate);
  }

  // node 0 is the center; layer j (1..layers) is the surface scaled by j/layers
  const int m = static_cast<int>(surf.size());
  std::vector<Vector> nodes;
  nodes.reserve(static_cast<std::size_t>(estimate));
  nodes.push_back(c);
  for (int j = 1; j <= layers; ++j) {
    const double s = static_cast<double>(j) / layers;
    for (const auto& p : surf) nodes.push_back(j == layers ? p : Vector(c + s * (p - c)));
  }
  std::vector<bool> boundary(nodes.size(), false);
  for (int i = 0; i < m; ++i) boundary[1 + (layers - 1) * m + i] = true;
  auto id = [m](int v, int j) { return 1 + (j - 1) * m + v; };

  std::vector<int> conn;
  conn.reserve(faces.size() * (3 * layers) * 4);
  auto emit = [&](std::array<int, 4> t) {
    if (simplex_measure(nodes, t, 3) < 0) std::swap(t[2], t[3]);
    if (simplex_measure(nodes, t, 3) <= 1e-14) throw MeshError("layered tetrahedralization produced a flat element");
    conn.insert(conn.end(), t.begin(), t.end());
  };
  for (auto f : faces) {
    std::sort(f.begin(), f.end());
    emit({0, id(f[0], 1), id(f[1], 1), id(f[2], 1)});
    for (int j = 2; j <= layers; ++j) {
      // prism split with diagonals from the lower index bottom to the higher
      // index top, which neighbouring prisms agree on
      const int a0 = id(f[0], j - 1), a1 = id(f[1], j - 1), a2 = id(f[2], j - 1);
      const int b0 = id(f[0], j), b1 = id(f[1], j), b2 = id(f[2], j);
      emit({a0, a1, a2, b2});
      emit({a0, a1, b1, b2});
      emit({a0, b0, b1, b2});
    }
  }
  return Mesh(3, std::move(nodes), std::move(conn), std::move(boundary), std::move(body));
}

}  // namespace

Mesh triangulate(std::shared_ptr<const Polytope> body, double target_size, const TriangulateOptions& options) {
  if (!body) throw ContractError("triangulate needs a body");
  if (!(target_size > 0.0) || !std::isfinite(target_size)) throw ContractError("target size must be positive");
  if (body->dimension() == 2) return triangulate_2d(std::move(body), target_size, options);
  return triangulate_3d(std::move(body), target_size, options);
}

Mesh triangulate(const Polytope& body, double target_size, const TriangulateOptions& options) {
  return triangulate(std::make_shared<const Polytope>(body), target_size, options);
}

Mesh refine(const Mesh& mesh) {
  const int n = mesh.dimension();
  std::vector<Vector> nodes = mesh.nodes();
  std::vector<bool> boundary = mesh.boundary_flags();
  const Polytope& body = mesh.body();

  // edges lying on boundary faces get their midpoints on the boundary
  std::unordered_map<std::uint64_t, int> boundary_edges;
  if (n == 3) {
    std::map<std::array<int, 3>, int> faces;
    for (std::size_t k = 0; k < mesh.simplex_count(); ++k) {
      const auto s = mesh.simplex(k);
      for (int omit = 0; omit < 4; ++omit) {
        std::array<int, 3> f;
        int m = 0;
        for (int i = 0; i < 4; ++i) if (i != omit) f[m++] = s[i];
        std::sort(f.begin(), f.end());
        ++faces[f];
      }
    }
    for (const auto& [f, count] : faces) {
      if (count != 1) continue;
      boundary_edges[edge_key(f[0], f[1])] = 1;
      boundary_edges[edge_key(f[1], f[2])] = 1;
      boundary_edges[edge_key(f[0], f[2])] = 1;
    }
  }

  std::unordered_map<std::uint64_t, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vector m = 0.5 * (nodes[a] + nodes[b]);
    bool on_b = false;
    if (n == 2) {
      on_b = boundary[a] && boundary[b] && std::abs(body.boundary_distance(m)) < 1e-9;
    } else if (boundary_edges.count(key)) {
      const Vector& c = body.interior_point();
      const Vector d = (m - c).normalized();
      m = c + body.radial_distance(c, d) * d;
      on_b = true;
    }
    nodes.push_back(m);
    boundary.push_back(on_b);
    const int idx = static_cast<int>(nodes.size()) - 1;
    midpoint.emplace(key, idx);
    return idx;
  };

  std::vector<int> conn;
  auto emit = [&](std::initializer_list<int> s) {
    std::vector<int> t(s);
    std::span<const int> view(t.data(), t.size());
    if (simplex_measure(nodes, view, n) < 0) std::swap(t[n - 1], t[n]);
    conn.insert(conn.end(), t.begin(), t.end());
  };

  for (std::size_t k = 0; k < mesh.simplex_count(); ++k) {
    const auto s = mesh.simplex(k);
    if (n == 2) {
      const int a = s[0], b = s[1], c = s[2];
      const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      emit({a, ab, ca});
      emit({ab, b, bc});
      emit({ca, bc, c});
      emit({ab, bc, ca});
      continue;
    }
    const int x0 = s[0], x1 = s[1], x2 = s[2], x3 = s[3];
    const int m01 = mid(x0, x1), m02 = mid(x0, x2), m03 = mid(x0, x3);
    const int m12 = mid(x1, x2), m13 = mid(x1, x3), m23 = mid(x2, x3);
    emit({x0, m01, m02, m03});
    emit({m01, x1, m12, m13});
    emit({m02, m12, x2, m23});
    emit({m03, m13, m23, x3});
    // inner octahedron, split along its shortest diagonal
    const std::array<std::array<int, 2>, 3> diag{{{m01, m23}, {m02, m13}, {m03, m12}}};
    int best = 0;
    for (int d = 1; d < 3; ++d) {
      if ((nodes[diag[d][0]] - nodes[diag[d][1]]).norm() < (nodes[diag[best][0]] - nodes[diag[best][1]]).norm()) {
        best = d;
      }
    }
    const auto& p = diag[best];
    const auto& q = diag[(best + 1) % 3];
    const auto& r = diag[(best + 2) % 3];
    const std::array<int, 4> ring{q[0], r[0], q[1], r[1]};
    for (int i = 0; i < 4; ++i) emit({p[0], p[1], ring[i], ring[(i + 1) % 4]});
  }
  return Mesh(n, std::move(nodes), std::move(conn), std::move(boundary), mesh.body_ptr());
}

MeshCheck check_mesh(const Mesh& mesh, double tol) {
  MeshCheck out;
  const int n = mesh.dimension();
  const Polytope& body = mesh.body();
  auto fail = [&](const std::string& why) {
    if (out.first_failure.empty()) out.first_failure = why;
  };

  out.min_measure = std::numeric_limits<double>::infinity();
  out.min_angle_deg = 180.0;
  double total = 0.0;
  for (std::size_t k = 0; k < mesh.simplex_count(); ++k) {
    const double m = mesh.measure(k);
    total += m;
    out.min_measure = std::min(out.min_measure, m);
    out.max_diameter = std::max(out.max_diameter, mesh.diameter(k));
    if (m < 1e-14) fail("simplex " + std::to_string(k) + " has measure " + std::to_string(m));
    if (n == 2) {
      const auto s = mesh.simplex(k);
      for (int i = 0; i < 3; ++i) {
        const Vector u = mesh.node(s[(i + 1) % 3]) - mesh.node(s[i]);
        const Vector v = mesh.node(s[(i + 2) % 3]) - mesh.node(s[i]);
        const double ang = std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
        out.min_angle_deg = std::min(out.min_angle_deg, ang * 180.0 / std::numbers::pi);
      }
    }
  }

  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const double d = body.boundary_distance(mesh.node(i));
    if (d < -tol) {
      ++out.outside_nodes;
      fail("node " + std::to_string(i) + " lies outside the body");
    }
    const bool geometric = std::abs(d) < tol;
    if (geometric != mesh.on_boundary(i)) {
      ++out.misflagged_nodes;
      fail("node " + std::to_string(i) + " has a wrong boundary flag");
    }
  }

  std::map<std::vector<int>, int> faces;
  for (std::size_t k = 0; k < mesh.simplex_count(); ++k) {
    const auto s = mesh.simplex(k);
    for (int omit = 0; omit <= n; ++omit) {
      std::vector<int> f;
      for (int i = 0; i <= n; ++i) if (i != omit) f.push_back(s[i]);
      std::sort(f.begin(), f.end());
      ++faces[f];
    }
  }
  for (const auto& [f, count] : faces) {
    bool all_boundary = true;
    for (int v : f) all_boundary = all_boundary && mesh.on_boundary(v);
    if (count > 2 || (count == 1 && !all_boundary)) {
      ++out.nonconforming_faces;
      fail("face shared by " + std::to_string(count) + " simplices");
    }
  }

  out.volume_defect = std::abs(total - body.volume()) / body.volume();
  out.ok = out.first_failure.empty();
  return out;
}

}  // namespace malin
