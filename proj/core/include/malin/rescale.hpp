#pragma once

#include "malin/affine.hpp"
#include "malin/geometry.hpp"
#include "malin/solver.hpp"

#include <string>
#include <vector>

namespace malin {

// phi~(x) = (det A)^{-2/n} phi(T x). Derivatives are exact compositions;
// det D^2 phi~(x) = det D^2 phi(T x).
class RescaledPotential final : public ConvexFunction {
 public:
  RescaledPotential(PotentialPtr original, AffineMap map);

  int dimension() const override { return original_->dimension(); }
  const std::string& label() const override { return label_; }
  std::string family_name() const override { return original_->family_name(); }
  bool admissible(const Vector& x) const override { return original_->admissible(map_.apply(x)); }
  Jet eval(const Vector& x) const override;
  double value(const Vector& x) const override { return factor_ * original_->value(map_.apply(x)); }
  PinchBounds declared_pinch() const override { return original_->declared_pinch(); }

  const AffineMap& map() const { return map_; }
  const PotentialPtr& original() const { return original_; }
  double factor() const { return factor_; }

 private:
  PotentialPtr original_;
  AffineMap map_;
  double factor_;
  std::string label_;
};

struct RescaledProblem {
  AffineMap map;
  PotentialPtr potential;
  ProblemData data;
  SectionSpec section;  // S(T^{-1} x0, (det A)^{-2/n} h)
  double kappa = 1.0;   // (det A)^{2/n}
};

// F~ = kappa A^{-1} F o T, likewise b~ and B~; f~ = kappa f o T; g~ = g o T;
// with kappa = (det A)^{2/n}. Each field keeps T and the original and
// evaluates lazily.
RescaledProblem rescale_problem(const ProblemData& data, const SectionSpec& section, const AffineMap& map);

struct TransformDiscrepancy {
  double max_discrepancy = 0.0;
  std::size_t samples = 0;
  double coarser_h = 0.0;
};

// max over the nodes x of the rescaled mesh of |u~(x) - u(T x)|.
TransformDiscrepancy verify_solution_transform(const SolveResult& original, const SolveResult& rescaled,
                                               const AffineMap& map);
// Same, over fixed points of the rescaled domain (for refinement studies,
// where the node set would otherwise grow with the mesh).
TransformDiscrepancy verify_solution_transform(const SolveResult& original, const SolveResult& rescaled,
                                               const AffineMap& map, const std::vector<Vector>& samples);

struct ScaleFactorRow {
  double height = 0.0;
  double det = 0.0;
  double ratio = 0.0;         // det A_h / h^{n/2}
  double inverse_norm = 0.0;  // ||A_h^{-1}||
  double inverse_norm_scaled = 0.0;  // ||A_h^{-1}|| h^{n/2}
};

struct ScaleFactorAudit {
  std::string family;
  std::vector<ScaleFactorRow> rows;
  double band() const;

  static std::string csv_header();  // family,h,detA,ratio,invnormA
  std::vector<std::string> csv_rows() const;
};

ScaleFactorAudit scale_factor_audit(const PotentialPtr& potential, const Vector& x0,
                                    const std::vector<double>& heights, int resolution = 0);

}  // namespace malin
