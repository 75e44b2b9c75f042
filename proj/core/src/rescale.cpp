#include "malin/rescale.hpp"

#include "malin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace malin {

RescaledPotential::RescaledPotential(PotentialPtr original, AffineMap map)
    : original_(std::move(original)), map_(std::move(map)) {
  if (!original_) throw ContractError("rescaling needs a potential");
  const int n = original_->dimension();
  if (map_.dimension() != n) throw MapError("map dimension differs from the potential");
  factor_ = std::pow(std::abs(map_.determinant()), -2.0 / n);
  label_ = original_->label().empty() ? "rescaled" : original_->label() + "~";
}

Jet RescaledPotential::eval(const Vector& x) const {
  const Jet j = original_->eval(map_.apply(x));
  const Matrix& a = map_.matrix();
  Jet out;
  out.value = factor_ * j.value;
  out.gradient = factor_ * a.transpose() * j.gradient;
  out.hessian = factor_ * a.transpose() * j.hessian * a;
  return out;
}

RescaledProblem rescale_problem(const ProblemData& data, const SectionSpec& section, const AffineMap& map) {
  const PotentialPtr& phi = section.potential ? section.potential : data.cofactor.source();
  auto rescaled = std::make_shared<const RescaledPotential>(phi, map);
  const double kappa = 1.0 / rescaled->factor();
  const Matrix a_inv = map.inverse_matrix();

  RescaledProblem out{map, rescaled, ProblemData(rescaled), SectionSpec{}, kappa};
  auto vec = [&](const VectorField& v) -> VectorField {
    if (!v) return {};
    return [v, map, a_inv, kappa](const Vector& x) -> Vector { return kappa * (a_inv * v(map.apply(x))); };
  };
  out.data.drift_b = vec(data.drift_b);
  out.data.drift_B = vec(data.drift_B);
  out.data.flux_F = vec(data.flux_F);
  if (data.source_f) {
    out.data.source_f = [f = data.source_f, map, kappa](const Vector& x) { return kappa * f(map.apply(x)); };
  }
  if (data.boundary_g) {
    out.data.boundary_g = [g = data.boundary_g, map](const Vector& x) { return g(map.apply(x)); };
  }
  if (data.div_B) {
    out.data.div_B = [d = data.div_B, map, kappa](const Vector& x) { return kappa * d(map.apply(x)); };
  }
  out.data.divB_certificate = data.divB_certificate;
  out.section.potential = rescaled;
  out.section.center = section.center.size() ? map.apply_inverse(section.center) : Vector();
  out.section.height = section.height / kappa;
  return out;
}

TransformDiscrepancy verify_solution_transform(const SolveResult& original, const SolveResult& rescaled,
                                               const AffineMap& map) {
  const PointLocator locator(original.solution.mesh_ptr());
  const Mesh& target = rescaled.solution.mesh();
  TransformDiscrepancy out;
  out.coarser_h = std::max(original.solution.mesh().h_mesh() * map.inverse_operator_norm(), target.h_mesh());
  for (std::size_t i = 0; i < target.node_count(); ++i) {
    const Vector y = map.apply(target.node(i));
    const double d = std::abs(rescaled.solution[i] - locator.evaluate(original.solution, y));
    out.max_discrepancy = std::max(out.max_discrepancy, d);
    ++out.samples;
  }
  return out;
}

TransformDiscrepancy verify_solution_transform(const SolveResult& original, const SolveResult& rescaled,
                                               const AffineMap& map, const std::vector<Vector>& samples) {
  const PointLocator from(original.solution.mesh_ptr());
  const PointLocator to(rescaled.solution.mesh_ptr());
  TransformDiscrepancy out;
  out.coarser_h = std::max(original.solution.mesh().h_mesh() * map.inverse_operator_norm(),
                           rescaled.solution.mesh().h_mesh());
  for (const Vector& x : samples) {
    const double d = std::abs(to.evaluate(rescaled.solution, x) - from.evaluate(original.solution, map.apply(x)));
    out.max_discrepancy = std::max(out.max_discrepancy, d);
    ++out.samples;
  }
  return out;
}

double ScaleFactorAudit::band() const {
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  double lo = rows.front().ratio, hi = lo;
  for (const auto& r : rows) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  return hi / lo;
}

std::string ScaleFactorAudit::csv_header() { return "family,h,detA,ratio,invnormA"; }

std::vector<std::string> ScaleFactorAudit::csv_rows() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    std::ostringstream os;
    os << std::setprecision(12) << family << ',' << r.height << ',' << r.det << ',' << r.ratio << ','
       << r.inverse_norm;
    out.push_back(os.str());
  }
  return out;
}

ScaleFactorAudit scale_factor_audit(const PotentialPtr& potential, const Vector& x0,
                                    const std::vector<double>& heights, int resolution) {
  const int n = potential->dimension();
  if (resolution <= 0) resolution = n == 2 ? 512 : 600;
  ScaleFactorAudit audit;
  audit.family = potential->family_name();
  for (double h : heights) {
    const Polytope body = extract_section(SectionSpec{potential, x0, h}, resolution);
    const NormalizedBody nb = john_normalize(body);
    ScaleFactorRow row;
    row.height = h;
    row.det = std::abs(nb.map.determinant());
    row.ratio = row.det / std::pow(h, 0.5 * n);
    row.inverse_norm = nb.map.inverse_operator_norm();
    row.inverse_norm_scaled = row.inverse_norm * std::pow(h, 0.5 * n);
    audit.rows.push_back(row);
  }
  return audit;
}

}  // namespace malin
