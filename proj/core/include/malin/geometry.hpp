#pragma once

#include "malin/affine.hpp"
#include "malin/polytope.hpp"
#include "malin/potential.hpp"

#include <string>
#include <vector>

namespace malin {

// S_phi(x0, h) = { y : phi(y) < phi(x0) + Dphi(x0).(y - x0) + h }.
struct SectionSpec {
  PotentialPtr potential;
  Vector center;
  double height = 0.0;
};

// phi minus its supporting affine function at x0, with the jet at x0 cached.
class SectionLevel {
 public:
  SectionLevel(PotentialPtr potential, Vector center);

  double operator()(const Vector& y) const;
  bool inside(const Vector& y, double height) const;
  const Vector& center() const { return center_; }
  const ConvexFunction& potential() const { return *potential_; }

 private:
  PotentialPtr potential_;
  Vector center_;
  double value0_;
  Vector gradient0_;
};

// Distance from x0 along a unit direction to the boundary of the section,
// by bisection on the height residual. Throws SectionError when the ray
// leaves the admissible domain before reaching the level.
double section_radius(const SectionSpec& spec, const Vector& direction);
double section_radius(const SectionLevel& level, double height, const Vector& direction);

// Boundary polytope of a section from `resolution` rays (loop for n = 2,
// Fibonacci surface samples for n = 3).
Polytope extract_section(const SectionSpec& spec, int resolution);

// |S| from the radial function by polar quadrature (spectrally accurate for
// smooth sections in n = 2).
double section_volume(const SectionSpec& spec, int resolution);

// E = center + shape (B_1), shape symmetric positive definite.
struct Ellipsoid {
  Vector center;
  Matrix shape;
};

// Minimum-volume enclosing ellipsoid by Khachiyan's barycentric ascent with
// Todd-Yildirim away steps. The result is scaled up, if needed, so that it
// contains every point.
Ellipsoid minimum_volume_ellipsoid(const std::vector<Vector>& points, double tolerance = 1e-7,
                                   int max_iterations = 200000);

struct NormalizedBody {
  AffineMap map;        // T
  Polytope normalized;  // T^{-1}(body)
};

// Affine T with B_1 subset T^{-1}(body) subset B_n. Throws ConditioningError
// on near-flat bodies (reporting the thinness ratio).
NormalizedBody john_normalize(const Polytope& body);

struct NormalizationCheck {
  bool ok = false;
  double min_support = 0.0;
  double max_support = 0.0;
  Vector min_direction;
  Vector max_direction;
};

// Support function >= 1 - tol and <= n + tol over sampled directions plus
// every facet normal (so the inner bound is exact for polytopes).
NormalizationCheck verify_normalized(const Polytope& body, double tolerance, int directions = 0);

struct VolumeScalingRow {
  double height = 0.0;
  double volume = 0.0;
  double ratio = 0.0;  // |S| / h^{n/2}
};

struct VolumeScaling {
  std::vector<VolumeScalingRow> rows;
  double min_ratio() const;
  double max_ratio() const;
  double band() const { return max_ratio() / min_ratio(); }
};

VolumeScaling section_volume_scaling(const PotentialPtr& potential, const Vector& x0,
                                     const std::vector<double>& heights, int resolution = 1024);

struct BallInclusion {
  double constant = 0.0;         // c, calibrated at t = h/2
  double required_radius = 0.0;  // c t^{1/(1+alpha)}
  double measured_inradius = 0.0;
  bool pass = false;
};

// Inradius of S(x0, t) about x0 against c t^{1/(1+alpha)}, with c fixed from
// the largest admissible height t = h/2. Requires 0 < t <= h/2.
BallInclusion ball_inclusion_check(const PotentialPtr& potential, const Vector& x0, double h,
                                   double t, double alpha, int resolution = 1024);

struct GeometryReport {
  std::string family;
  double height = 0.0;
  double volume = 0.0;
  double ratio = 0.0;
  double inner_radius = 0.0;  // of the normalized body
  double outer_radius = 0.0;
  double ball_radius = 0.0;
  double alpha_used = 1.0;

  static std::string csv_header();  // family,h,volume,ratio,inner_r,outer_r
  std::string csv_row() const;
};

GeometryReport geometry_report(const PotentialPtr& potential, const Vector& x0, double h,
                               double alpha = 1.0, int resolution = 1024);

struct IntegrabilityEntry {
  double epsilon = 0.0;
  double integral = 0.0;          // at the requested resolution
  double refined_integral = 0.0;  // at twice the resolution
  bool stable = false;            // relative change below 1e-3
  bool divergent = false;
};

// Integral of the Frobenius norm ||D^2 phi||^{1+eps} over the section by
// polar Gauss quadrature.
std::vector<IntegrabilityEntry> estimate_hessian_integrability(const SectionSpec& section,
                                                               const std::vector<double>& epsilons,
                                                               int resolution = 100);

}  // namespace malin
