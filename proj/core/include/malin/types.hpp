#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace malin {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ScalarField = std::function<double(const Vector&)>;
using VectorField = std::function<Vector(const Vector&)>;

// Axis-aligned box [lower, upper] in R^n.
struct Box {
  Vector lower;
  Vector upper;

  static Box cube(int n, double half_width);
  static Box centered(const Vector& center, double half_width);

  int dimension() const { return static_cast<int>(lower.size()); }
  bool contains(const Vector& x, double margin = 0.0) const;
};

inline Box Box::cube(int n, double half_width) {
  return Box{Vector::Constant(n, -half_width), Vector::Constant(n, half_width)};
}

inline Box Box::centered(const Vector& center, double half_width) {
  return Box{center.array() - half_width, center.array() + half_width};
}

inline bool Box::contains(const Vector& x, double margin) const {
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] + margin || x[i] > upper[i] - margin) return false;
  }
  return true;
}

inline Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

inline Vector vec3(double x, double y, double z) {
  Vector v(3);
  v << x, y, z;
  return v;
}

inline Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace malin
