#include "delaunay.hpp"

#include "malin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>

namespace malin::detail {

namespace {

using P = Eigen::Vector2d;

double orient(const P& a, const P& b, const P& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// > 0 when d lies inside the circumcircle of the counter-clockwise triangle abc.
double incircle(const P& a, const P& b, const P& c, const P& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

P circumcenter(const P& a, const P& b, const P& c) {
  const P ba = b - a, ca = c - a;
  const double d = 2.0 * (ba.x() * ca.y() - ba.y() * ca.x());
  const double b2 = ba.squaredNorm(), c2 = ca.squaredNorm();
  return a + P((ca.y() * b2 - ba.y() * c2) / d, (ba.x() * c2 - ca.x() * b2) / d);
}

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nb;  // nb[i] lies across the edge opposite v[i]; -1 on the boundary
};

enum class Where { Inside, OnEdge, Outside, Duplicate };

struct Location {
  Where where;
  int tri;
  int edge;  // for OnEdge
};

class Triangulation {
 public:
  Triangulation(double scale) : scale_(scale) {
    eps_orient_ = 1e-13 * scale * scale;
    eps_circle_ = 1e-12 * scale * scale * scale * scale;
  }

  std::vector<P> pts;
  std::vector<char> boundary;
  std::vector<Tri> tris;
  std::vector<std::array<int, 2>> segments;
  std::vector<int> touched;

  void build_fan(int center, const std::vector<int>& loop) {
    const int m = static_cast<int>(loop.size());
    const int base = static_cast<int>(tris.size());
    for (int i = 0; i < m; ++i) {
      Tri t;
      t.v = {center, loop[i], loop[(i + 1) % m]};
      t.nb = {-1, base + (i + 1) % m, base + (i + m - 1) % m};
      tris.push_back(t);
      segments.push_back({loop[i], loop[(i + 1) % m]});
    }
    std::vector<std::pair<int, int>> stack;
    for (int i = 0; i < m; ++i) {
      stack.push_back({base + i, 1});
      stack.push_back({base + i, 2});
    }
    // global Lawson pass; no new point so flip edges until locally Delaunay
    for (int sweep = 0; sweep < 1000; ++sweep) {
      bool flipped = false;
      for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        for (int i = 0; i < 3; ++i) {
          if (!locally_delaunay(t, i)) {
            flip(t, i);
            flipped = true;
          }
        }
      }
      if (!flipped) break;
    }
  }

  int add_point(const P& p, bool on_boundary) {
    pts.push_back(p);
    boundary.push_back(on_boundary ? 1 : 0);
    return static_cast<int>(pts.size()) - 1;
  }

  Location locate(const P& p, int start = -1) const {
    int t = start >= 0 ? start : last_;
    const std::size_t limit = 4 * tris.size() + 16;
    unsigned salt = 0;
    for (std::size_t step = 0; step < limit; ++step) {
      const Tri& tr = tris[t];
      int moved = -1;
      const int first = static_cast<int>(salt++ % 3);
      for (int k = 0; k < 3; ++k) {
        const int i = (first + k) % 3;
        const double o = orient(pts[tr.v[(i + 1) % 3]], pts[tr.v[(i + 2) % 3]], p);
        if (o < -eps_orient_) {
          moved = i;
          break;
        }
      }
      if (moved < 0) {
        for (int i = 0; i < 3; ++i) {
          if ((pts[tr.v[i]] - p).norm() <= 1e-12 * scale_) return {Where::Duplicate, t, i};
        }
        int edge = -1;
        double best = eps_orient_;
        for (int i = 0; i < 3; ++i) {
          const double o = std::abs(orient(pts[tr.v[(i + 1) % 3]], pts[tr.v[(i + 2) % 3]], p));
          if (o <= best) {
            best = o;
            edge = i;
          }
        }
        if (edge >= 0) return {Where::OnEdge, t, edge};
        return {Where::Inside, t, -1};
      }
      if (tr.nb[moved] < 0) return {Where::Outside, t, moved};
      t = tr.nb[moved];
    }
    // walk failed to converge; fall back to a scan
    for (int s = 0; s < static_cast<int>(tris.size()); ++s) {
      const Tri& tr = tris[s];
      bool in = true;
      for (int i = 0; i < 3 && in; ++i) {
        in = orient(pts[tr.v[(i + 1) % 3]], pts[tr.v[(i + 2) % 3]], p) >= -eps_orient_;
      }
      if (in) return locate(p, s);
    }
    return {Where::Outside, 0, -1};
  }

  // Inserts p; returns its index or -1 when it duplicates an existing point
  // or lies outside.
  int insert(const P& p, bool on_boundary, const std::optional<Location>& known = std::nullopt) {
    const Location loc = known ? *known : locate(p);
    if (loc.where == Where::Duplicate || loc.where == Where::Outside) return -1;
    touched.clear();
    const int idx = add_point(p, on_boundary);
    if (loc.where == Where::Inside) split_inside(loc.tri, idx);
    else split_edge(loc.tri, loc.edge, idx);
    last_ = touched.empty() ? last_ : touched.front();
    return idx;
  }

  int opposite_index(int t, int v) const {
    for (int i = 0; i < 3; ++i) if (tris[t].v[i] == v) return i;
    return -1;
  }

  bool locally_delaunay(int t, int i) const {
    const int u = tris[t].nb[i];
    if (u < 0) return true;
    const Tri& tr = tris[t];
    const int a = tr.v[i], b = tr.v[(i + 1) % 3], c = tr.v[(i + 2) % 3];
    const int j = edge_in(u, c, b);
    const int d = tris[u].v[j];
    if (incircle(pts[a], pts[b], pts[c], pts[d]) <= eps_circle_) return true;
    // only flip when the quadrilateral a b d c is strictly convex
    return !(orient(pts[a], pts[b], pts[d]) > eps_orient_ && orient(pts[a], pts[d], pts[c]) > eps_orient_);
  }

 private:
  // index in u of the vertex opposite the directed edge (x, y)
  int edge_in(int u, int x, int y) const {
    const Tri& tr = tris[u];
    for (int j = 0; j < 3; ++j) {
      if (tr.v[(j + 1) % 3] == x && tr.v[(j + 2) % 3] == y) return j;
    }
    throw MeshError("triangulation adjacency is inconsistent");
  }

  void replace_neighbor(int t, int old_nb, int new_nb) {
    if (t < 0) return;
    for (int i = 0; i < 3; ++i) {
      if (tris[t].nb[i] == old_nb) {
        tris[t].nb[i] = new_nb;
        return;
      }
    }
  }

  // Flips the edge opposite v[i] of t. Afterwards t = (a, b, d) and
  // u = (a, d, c) where a = v[i] and d is the far vertex of the neighbour.
  void flip(int t, int i) {
    const Tri tr = tris[t];
    const int u = tr.nb[i];
    const int a = tr.v[i], b = tr.v[(i + 1) % 3], c = tr.v[(i + 2) % 3];
    const int nt_ca = tr.nb[(i + 1) % 3], nt_ab = tr.nb[(i + 2) % 3];
    const int j = edge_in(u, c, b);
    const Tri ur = tris[u];
    const int d = ur.v[j];
    const int nu_bd = ur.nb[(j + 1) % 3];  // across (b, d), opposite c
    const int nu_dc = ur.nb[(j + 2) % 3];  // across (d, c), opposite b
    tris[t].v = {a, b, d};
    tris[t].nb = {nu_bd, u, nt_ab};
    tris[u].v = {a, d, c};
    tris[u].nb = {nu_dc, nt_ca, t};
    replace_neighbor(nu_bd, u, t);
    replace_neighbor(nt_ca, t, u);
    touched.push_back(t);
    touched.push_back(u);
  }

  // Restores the Delaunay property around a new point sitting at v[0].
  void legalize(std::vector<int> stack) {
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      if (!locally_delaunay(t, 0)) {
        const int u = tris[t].nb[0];
        flip(t, 0);
        stack.push_back(t);
        stack.push_back(u);
      }
    }
  }

  void split_inside(int t, int p) {
    const Tri tr = tris[t];
    const int a = tr.v[0], b = tr.v[1], c = tr.v[2];
    const int na = tr.nb[0], nb = tr.nb[1], nc = tr.nb[2];
    const int t1 = static_cast<int>(tris.size());
    const int t2 = t1 + 1;
    tris[t] = {{p, b, c}, {na, t1, t2}};
    tris.push_back({{p, c, a}, {nb, t2, t}});
    tris.push_back({{p, a, b}, {nc, t, t1}});
    replace_neighbor(nb, t, t1);
    replace_neighbor(nc, t, t2);
    touched.insert(touched.end(), {t, t1, t2});
    legalize({t, t1, t2});
  }

  void split_edge(int t, int i, int p) {
    const Tri tr = tris[t];
    const int a = tr.v[i], b = tr.v[(i + 1) % 3], c = tr.v[(i + 2) % 3];
    const int nb_ca = tr.nb[(i + 1) % 3], nb_ab = tr.nb[(i + 2) % 3];
    const int u = tr.nb[i];
    if (u < 0) {
      const int t1 = static_cast<int>(tris.size());
      tris[t] = {{p, a, b}, {nb_ab, -1, t1}};
      tris.push_back({{p, c, a}, {nb_ca, t, -1}});
      replace_neighbor(nb_ca, t, t1);
      for (auto& s : segments) {
        if ((s[0] == b && s[1] == c) || (s[0] == c && s[1] == b)) {
          const int other = s[1];
          s[1] = p;
          segments.push_back({p, other});
          break;
        }
      }
      touched.insert(touched.end(), {t, t1});
      legalize({t, t1});
      return;
    }
    const int j = edge_in(u, c, b);
    const Tri ur = tris[u];
    const int d = ur.v[j];
    const int nu_bd = ur.nb[(j + 1) % 3];
    const int nu_dc = ur.nb[(j + 2) % 3];
    const int t2 = static_cast<int>(tris.size());
    const int t4 = t2 + 1;
    tris[t] = {{p, c, a}, {nb_ca, t2, t4}};
    tris.push_back({{p, a, b}, {nb_ab, u, t}});  // t2
    tris[u] = {{p, b, d}, {nu_bd, t4, t2}};
    tris.push_back({{p, d, c}, {nu_dc, t, u}});  // t4
    replace_neighbor(nb_ab, t, t2);
    replace_neighbor(nu_dc, u, t4);
    touched.insert(touched.end(), {t, t2, u, t4});
    legalize({t, t2, u, t4});
  }

  double scale_;
  double eps_orient_;
  double eps_circle_;
  int last_ = 0;
};

double min_angle(const P& a, const P& b, const P& c) {
  auto ang = [](const P& o, const P& x, const P& y) {
    const P u = x - o, v = y - o;
    return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
  };
  return std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)});
}

double max_edge(const P& a, const P& b, const P& c) {
  return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

}  // namespace

PlanarMesh triangulate_convex_polygon(const std::vector<P>& loop, const P& center,
                                      const PlanarMeshOptions& opt) {
  const double s = opt.target_size;
  double diam = 0.0;
  for (const auto& v : loop) diam = std::max(diam, 2.0 * (v - center).norm());
  Triangulation tri(diam);

  // boundary: keep every loop vertex, subdivide long edges
  std::vector<int> ring;
  const std::size_t m = loop.size();
  for (std::size_t i = 0; i < m; ++i) {
    const P& a = loop[i];
    const P& b = loop[(i + 1) % m];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / s - 1e-9)));
    for (int k = 0; k < pieces; ++k) {
      ring.push_back(tri.add_point(a + (static_cast<double>(k) / pieces) * (b - a), true));
    }
  }
  const int c = tri.add_point(center, false);
  tri.build_fan(c, ring);

  // distance to the polygon boundary (positive inside)
  std::vector<std::pair<P, double>> halfplanes;
  for (std::size_t i = 0; i < m; ++i) {
    const P e = loop[(i + 1) % m] - loop[i];
    if (e.norm() == 0.0) continue;
    const P nrm = P(e.y(), -e.x()).normalized();
    halfplanes.push_back({nrm, nrm.dot(loop[i])});
  }
  auto depth = [&](const P& x) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& [nrm, off] : halfplanes) d = std::min(d, off - nrm.dot(x));
    return d;
  };

  // hexagonal lattice through the center
  const double spacing = opt.lattice_factor * s;
  const double row = spacing * std::sqrt(3.0) / 2.0;
  const int rows = spacing > 0.0 ? static_cast<int>(std::ceil(diam / row)) + 1 : 0;
  const int cols = spacing > 0.0 ? static_cast<int>(std::ceil(diam / spacing)) + 2 : 0;
  for (int r = -rows; r <= rows && opt.lattice_factor > 0.0; ++r) {
    const double shift = (r % 2 == 0) ? 0.0 : 0.5 * spacing;
    for (int q = -cols; q <= cols; ++q) {
      if (r == 0 && q == 0) continue;
      const P x = center + P(q * spacing + shift, r * row);
      if (depth(x) >= opt.clearance_factor * spacing) tri.insert(x, false);
      if (tri.pts.size() > opt.max_points) throw MeshError("mesh point budget exceeded while seeding");
    }
  }

  const double bound = opt.min_angle_deg * std::numbers::pi / 180.0;
  const double max_len = opt.max_edge_factor * s;
  auto is_bad = [&](int t) {
    const auto& v = tri.tris[t].v;
    const P &a = tri.pts[v[0]], &b = tri.pts[v[1]], &cc = tri.pts[v[2]];
    return min_angle(a, b, cc) < bound || max_edge(a, b, cc) > max_len;
  };
  auto encroaches = [&](const P& x, const std::array<int, 2>& seg) {
    const P& a = tri.pts[seg[0]];
    const P& b = tri.pts[seg[1]];
    return (a - x).dot(b - x) < 0.0;
  };

  auto split_segment = [&](std::size_t k) {
    const auto seg = tri.segments[k];
    const P mid = 0.5 * (tri.pts[seg[0]] + tri.pts[seg[1]]);
    const int idx = tri.insert(mid, true);
    if (idx < 0) throw MeshError("could not split a boundary segment");
    return idx;
  };

  // encroached segments seen from the apex of their inner triangle
  auto fix_encroachment = [&]() {
    for (int pass = 0; pass < 10000; ++pass) {
      bool any = false;
      for (int t = 0; t < static_cast<int>(tri.tris.size()); ++t) {
        for (int i = 0; i < 3; ++i) {
          if (tri.tris[t].nb[i] >= 0) continue;
          const auto& v = tri.tris[t].v;
          const std::array<int, 2> seg{v[(i + 1) % 3], v[(i + 2) % 3]};
          if (!encroaches(tri.pts[v[i]], seg)) continue;
          for (std::size_t k = 0; k < tri.segments.size(); ++k) {
            const auto& sk = tri.segments[k];
            if ((sk[0] == seg[0] && sk[1] == seg[1]) || (sk[0] == seg[1] && sk[1] == seg[0])) {
              split_segment(k);
              any = true;
              break;
            }
          }
        }
      }
      if (!any) return;
    }
    throw MeshError("boundary encroachment did not resolve");
  };
  fix_encroachment();

  std::deque<int> queue;
  for (int t = 0; t < static_cast<int>(tri.tris.size()); ++t) queue.push_back(t);
  const std::size_t limit = std::min(opt.max_points, 50 * tri.pts.size() + 10000);
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    if (!is_bad(t)) continue;
    if (tri.pts.size() > limit) throw MeshError("quality refinement did not terminate within the point budget");
    const auto& v = tri.tris[t].v;
    P cc = circumcenter(tri.pts[v[0]], tri.pts[v[1]], tri.pts[v[2]]);
    if (opt.off_centers) {
      // point on the bisector of the shortest edge seeing it under the bound
      int e = 0;
      double shortest = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 3; ++i) {
        const double len = (tri.pts[v[(i + 1) % 3]] - tri.pts[v[(i + 2) % 3]]).norm();
        if (len < shortest) {
          shortest = len;
          e = i;
        }
      }
      const P& p0 = tri.pts[v[(e + 1) % 3]];
      const P& p1 = tri.pts[v[(e + 2) % 3]];
      const P mid = 0.5 * (p0 + p1);
      const double reach = 0.5 * shortest / std::tan(0.5 * bound);
      if ((cc - mid).norm() > reach) cc = mid + reach * (cc - mid).normalized();
    }

    std::vector<std::size_t> hit;
    for (std::size_t k = 0; k < tri.segments.size(); ++k) {
      if (encroaches(cc, tri.segments[k])) hit.push_back(k);
    }
    std::vector<int> changed;
    if (hit.empty()) {
      const Location loc = tri.locate(cc, t);
      if (loc.where == Where::Outside) {
        // numerically outside: split the nearest boundary segment instead
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < tri.segments.size(); ++k) {
          const P mid = 0.5 * (tri.pts[tri.segments[k][0]] + tri.pts[tri.segments[k][1]]);
          if ((mid - cc).norm() < bd) {
            bd = (mid - cc).norm();
            best = k;
          }
        }
        hit.push_back(best);
      } else if (tri.insert(cc, false, loc) >= 0) {
        changed = tri.touched;
      } else {
        continue;  // duplicate circumcenter; triangle cannot be improved
      }
    }
    if (!hit.empty()) {
      // split from the back so earlier indices stay valid
      std::sort(hit.rbegin(), hit.rend());
      for (auto k : hit) {
        split_segment(k);
        changed.insert(changed.end(), tri.touched.begin(), tri.touched.end());
      }
      fix_encroachment();
      for (int q = 0; q < static_cast<int>(tri.tris.size()); ++q) changed.push_back(q);
      queue.push_back(t);
    }
    for (int q : changed) queue.push_back(q);
  }

  PlanarMesh out;
  out.points = tri.pts;
  out.boundary.assign(tri.boundary.begin(), tri.boundary.end());
  out.triangles.reserve(tri.tris.size());
  for (const auto& t : tri.tris) out.triangles.push_back(t.v);
  return out;
}

}  // namespace malin::detail
