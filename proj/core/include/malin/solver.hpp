#pragma once

#include "malin/fields.hpp"
#include "malin/potential.hpp"

#include <Eigen/Sparse>

#include <optional>
#include <string>

namespace malin {

// How div B <= 0 is known for a problem.
struct DivergenceCertificate {
  enum class Kind { AnalyticallyNonpositive, SampledNonpositive, Unknown };
  Kind kind = Kind::Unknown;
  double tolerance = 0.0;  // for SampledNonpositive

  static DivergenceCertificate analytic() { return {Kind::AnalyticallyNonpositive, 0.0}; }
  static DivergenceCertificate sampled(double tol) { return {Kind::SampledNonpositive, tol}; }
  static DivergenceCertificate unknown() { return {Kind::Unknown, 0.0}; }
  bool nonpositive() const { return kind != Kind::Unknown; }
};

std::string to_string(DivergenceCertificate::Kind kind);

// Coefficients of  -div(Phi Du + u B) + b . Du = f - div F  with u = g on the
// boundary. Empty fields are identically zero.
struct ProblemData {
  CofactorField cofactor;
  VectorField drift_b;
  VectorField drift_B;
  VectorField flux_F;
  ScalarField source_f;
  ScalarField boundary_g;
  DivergenceCertificate divB_certificate = DivergenceCertificate::analytic();
  // Exact div B when known; otherwise central differences are used.
  ScalarField div_B;

  explicit ProblemData(PotentialPtr potential) : cofactor(std::move(potential)) {}

  Vector b(const Vector& x) const;
  Vector B(const Vector& x) const;
  Vector F(const Vector& x) const;
  double f(const Vector& x) const;
  double g(const Vector& x) const;
  double divergence_B(const Vector& x) const;

  bool homogeneous() const { return !flux_F && !source_f; }
};

// Central-difference div B at every node must stay below the certificate
// tolerance; throws HypothesisError naming the worst node otherwise.
void validate_certificate(const Mesh& mesh, const ProblemData& data);

struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Vector load;
};

enum class AssemblyForm {
  Divergence,     // int Phi Du.Dv + u B.Dv + (b.Du) v
  Nondivergence,  // int Phi Du.Dv + ((b - B).Du) v - (div B) u v
};

// Element integrals with one centroid point per simplex. `dirichlet`
// replaces boundary rows by identity rows with load g.
LinearSystem assemble(const Mesh& mesh, const ProblemData& data, AssemblyForm form = AssemblyForm::Divergence,
                      bool dirichlet = true);

struct SolveOptions {
  double tolerance = 1e-10;  // relative algebraic residual
  AssemblyForm form = AssemblyForm::Divergence;
  double max_condition = 1e12;
  std::size_t direct_limit = 200000;
  int max_iterations = 5000;
  bool estimate_condition = true;
};

struct SolveResult {
  explicit SolveResult(DiscreteField u) : solution(std::move(u)) {}

  DiscreteField solution;
  double residual = 0.0;  // ||A u - l|| / ||l||
  double weak_residual_sample = 0.0;
  int iterations = 0;     // refinement sweeps (direct) or Krylov iterations
  std::string method;     // "SparseLU" or "BiCGSTAB+ILUT"
  double condition_estimate = 0.0;
  double max_peclet = 0.0;
  bool peclet_warning = false;
};

SolveResult solve_dirichlet(MeshPtr mesh, const ProblemData& data, const SolveOptions& options = {});

struct MaximumPrincipleReport {
  bool pass = false;
  bool two_sided = true;  // div B vanishes at every node
  double max_value = 0.0;
  double min_value = 0.0;
  std::size_t argmax = 0;
  std::size_t argmin = 0;
  bool max_on_boundary = false;
  bool min_on_boundary = false;
  double boundary_max = 0.0;
  double boundary_min = 0.0;
  double violation = 0.0;  // worst interior excess beyond the allowed range
  std::optional<std::size_t> worst_node;
};

// Requires f = F = 0 and a nonpositive div B certificate. With div B = 0 the
// interior must stay within [min g, max g]; otherwise within
// [min(g, 0), max(g, 0)]. Tolerance 1e-8 times the larger of max - min
// and max |u|.
MaximumPrincipleReport maximum_principle_check(const SolveResult& result, const ProblemData& data);

// a(u, v) - l(v) for a test field vanishing on the boundary.
double weak_residual(const SolveResult& result, const ProblemData& data, const DiscreteField& test_field,
                     AssemblyForm form = AssemblyForm::Divergence);
double weak_residual(const DiscreteField& u, const ProblemData& data, const DiscreteField& test_field,
                     AssemblyForm form = AssemblyForm::Divergence);

}  // namespace malin
