#pragma once

#include "malin/geometry.hpp"
#include "malin/polytope.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace malin::test {

inline constexpr double pi = std::numbers::pi;

// Regular polygon approximating an ellipse with the given semi-axes.
inline Polytope ellipse(double a, double b, int vertices = 256, Vector center = Vector::Zero(2)) {
  std::vector<Vector> pts;
  for (int i = 0; i < vertices; ++i) {
    const double th = 2.0 * pi * i / vertices;
    pts.push_back(center + vec2(a * std::cos(th), b * std::sin(th)));
  }
  return Polytope(2, pts, Provenance::Transformed, center);
}

inline Polytope disk(int vertices = 256) { return ellipse(1.0, 1.0, vertices); }

inline Polytope square(double half = 1.0) {
  return Polytope(2, {vec2(-half, -half), vec2(half, -half), vec2(half, half), vec2(-half, half)},
                  Provenance::Transformed, Vector::Zero(2));
}

inline Polytope ball3(double radius = 1.0, int samples = 400) {
  std::vector<Vector> pts;
  for (const Vector& d : sphere_directions(3, samples)) pts.push_back(radius * d);
  return Polytope(3, pts, Provenance::Transformed, Vector::Zero(3));
}

// Hull of `count` uniform points in [-1, 1]^2.
inline Polytope random_polygon(std::uint64_t seed, int count = 20) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vector> pts;
  for (int i = 0; i < count; ++i) pts.push_back(vec2(u(rng), u(rng)));
  std::vector<Vector> hull;
  for (int i : convex_hull_2d(pts)) hull.push_back(pts[i]);
  Vector c = Vector::Zero(2);
  for (const auto& p : hull) c += p;
  c /= static_cast<double>(hull.size());
  return Polytope(2, hull, Provenance::Transformed, c);
}

inline double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace malin::test
