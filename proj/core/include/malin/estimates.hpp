#pragma once

#include "malin/geometry.hpp"
#include "malin/rescale.hpp"
#include "malin/solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace malin {

// ---- exponent bookkeeping ---------------------------------------------

struct MoserSchedule {
  int n = 2;
  double q = 0.0;
  double q_hat = 0.0;  // 2q / (q - 1)
  double n_hat = 0.0;  // 2n / (n - 2) for n >= 3, 2 q_hat for n = 2
  double chi = 0.0;    // n_hat / q_hat

  double exponent(int m) const;  // chi^m q_hat
  std::vector<double> exponents(int depth) const;
};

// Throws HypothesisError unless q > n/2.
MoserSchedule moser_schedule(double q, int n);

// min{1 - n/(2r), alpha/(1+alpha)}; throws HypothesisError unless r > n/2.
double gamma_formula(int n, double r, double alpha);

// ---- data and solves on sections --------------------------------------

// Random smooth boundary data that is nonnegative on the whole plane:
// for n = 2 a trigonometric polynomial in the angle about `center`,
//   c0 + sum_{k<=degree} (a_k cos k theta + b_k sin k theta),
// with a_k, b_k uniform in [-1, 1] / k and c0 chosen so that the minimum
// equals `margin` times the peak-to-peak range. For n = 3 the angle is
// replaced by the unit direction and the modes by sin(omega . d + phase).
class RandomBoundaryData {
 public:
  RandomBoundaryData(int n, std::uint64_t seed, const Vector& center, int degree = 3, double margin = 0.1);

  double operator()(const Vector& x) const;
  // Harmonic extension into the disk of radius R about the center (n = 2).
  double harmonic_extension(const Vector& x, double radius) const;
  double offset() const { return offset_; }
  const std::vector<double>& cos_coefficients() const { return a_; }
  const std::vector<double>& sin_coefficients() const { return b_; }
  ScalarField field() const;

 private:
  double raw(const Vector& direction) const;
  int n_;
  Vector center_;
  std::vector<double> a_, b_;
  std::vector<Vector> omega_;
  std::vector<double> phase_;
  double offset_ = 0.0;
};

struct SectionMeshOptions {
  double relative_size = 0.1;  // target size as a fraction of the section's inradius about x0
  int resolution = 0;          // boundary rays (0: 256 for n = 2, 400 samples for n = 3)
  int refinements = 0;         // uniform refinements after triangulation
};

MeshPtr mesh_section(const SectionSpec& spec, const SectionMeshOptions& options);

struct SectionSolve {
  SectionSpec spec;
  MeshPtr mesh;
  SolveResult result;
};

SectionSolve solve_on_section(const SectionSpec& spec, const ProblemData& data, const SectionMeshOptions& options,
                              const SolveOptions& solve = {});

// Extremes of u over S(x0, t): nodal values with the level-set test plus
// interpolated values at exact boundary points of S(x0, t).
struct SectionExtrema {
  double sup = 0.0;
  double inf = 0.0;
  std::size_t nodes = 0;
  std::size_t boundary_samples = 0;
};

SectionExtrema section_extrema(const DiscreteField& u, const PointLocator& locator, const SectionLevel& level,
                               double t, int boundary_samples = 0);

// Region predicate for S(x0, t).
Region section_region(const SectionLevel& level, double t);

// ||F||_inf + ||f||_{L^r} over a region of the mesh.
double data_norm(const Mesh& mesh, const ProblemData& data, double r, const Region& region = {});

// ---- reports ------------------------------------------------------------

struct EstimateReport {
  std::string kind;
  std::string label;
  std::string family;
  std::vector<double> scales;
  nlohmann::json measured = nlohmann::json::object();
  std::uint64_t mesh_hash = 0;
  std::uint64_t config_hash = 0;
  std::vector<std::string> notes;

  // Every number in `measured` finite and the scale list dyadic.
  bool valid(std::string* why = nullptr) const;
  nlohmann::json to_json() const;
  static EstimateReport from_json(const nlohmann::json& j);
};

// Ordinary least squares slope and intercept of y on x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ---- Harnack ------------------------------------------------------------

struct HarnackSetup {
  SectionSpec section;  // S(x0, h) where the problem is solved
  double t = 0.0;       // inner height, t <= h/2
  SectionMeshOptions mesh;
  double r = 0.0;       // norm exponent for f (0: n)
  double gamma = -1.0;  // exponent for the data term (negative: gamma_formula(n, r, 1))
};

struct HarnackResult {
  double h = 0.0;
  double t = 0.0;
  double sup = 0.0;
  double inf = 0.0;
  double quotient = 0.0;
  double data_norm = 0.0;  // ||F||_inf + ||f||_r
  double gamma = 0.0;
  double data_term = 0.0;  // data_norm t^gamma
  double h_mesh = 0.0;
  std::size_t nodes_inside = 0;
  std::uint64_t mesh_hash = 0;
};

// Throws PositivityError when inf <= 0 in a homogeneous run.
HarnackResult harnack_experiment(const HarnackSetup& setup, const ProblemData& data);
HarnackResult harnack_measure(const SectionSolve& solve, double t, const ProblemData& data, double r,
                              double gamma);

struct HarnackSweep {
  std::vector<HarnackResult> rows;
  double band_after_first = 0.0;  // max/min quotient over rows[1..]
};

// Quotients over dyadic (h, h/2) with boundary data fixed in normalized
// coordinates: g = pattern o T_h^{-1} where T_h normalizes S(x0, h).
HarnackSweep harnack_scale_sweep(const PotentialPtr& potential, const Vector& x0, const std::vector<double>& heights,
                                 const ScalarField& pattern, const SectionMeshOptions& mesh);

// ---- oscillation --------------------------------------------------------

struct OscillationTrace {
  std::vector<double> heights;
  std::vector<double> sup;
  std::vector<double> inf;
  std::vector<double> osc;
};

struct HoelderResult {
  OscillationTrace trace;
  std::vector<double> ratios;  // osc(h_{k+1}) / osc(h_k)
  double gamma_osc = 0.0;      // osc ~ A h^gamma
  double amplitude = 0.0;
  double beta = 0.0;           // largest per-step ratio
  bool recursion_holds = false;
  bool early_stop = false;
  double h_mesh = 0.0;
  std::uint64_t mesh_hash = 0;
};

// Measures osc over S(x0, h0 / 2^k), k = 0..depth, of a field defined on a
// mesh covering S(x0, h0).
HoelderResult oscillation_trace(const DiscreteField& u, const SectionLevel& level, double h0, int depth);

// Solves on S(x0, 2 h0) and traces the oscillation.
HoelderResult hoelder_experiment(const PotentialPtr& potential, const ProblemData& data, const Vector& x0, double h0,
                                 int depth, const SectionMeshOptions& mesh);

struct HoelderL2Report {
  double constant = 0.0;
  double gamma = 0.0;
  double denominator = 0.0;  // ||F||_inf + ||f||_r + ||u||_{L^2(S(x0, 2 h0))}
  std::size_t pairs = 0;
};

// max |u(x) - u(y)| / (denominator |x - y|^gamma) over the given pairs
// (all inside S(x0, h0)); u lives on a mesh of S(x0, 2 h0).
HoelderL2Report hoelder_l2_report(const SectionSolve& solve, const ProblemData& data, double gamma,
                                  const std::vector<std::pair<Vector, Vector>>& pairs, double r = 0.0);
std::vector<std::pair<Vector, Vector>> random_pairs_in_section(const SectionLevel& level, double h, std::size_t count,
                                                               std::uint64_t seed);

// ---- Moser chain and log transform ------------------------------------

struct MoserChain {
  MoserSchedule schedule;
  double k = 0.0;
  std::vector<double> exponents;
  std::vector<double> norms;   // ||u^+ + k||_{gamma_m}
  std::vector<double> ratios;  // norms[m+1] / norms[m]
  double sup_u_plus = 0.0;
  double l2_u_plus = 0.0;
  double terminal_ratio = 0.0;  // sup u^+ / (k + ||u^+||_2)
  bool interpolation_ok = false;
  double interpolation_margin = 0.0;  // smallest rhs/lhs - 1 over audited fields
};

MoserChain moser_chain_audit(const DiscreteField& u, double k, const MoserSchedule& schedule, int depth,
                             const Region& region = {});

// ||w||_{q} <= ||w||_inf^{1-2/q} ||w||_2^{2/q} at quadrature level; returns
// rhs / lhs (>= 1 when the inequality holds).
double interpolation_inequality_ratio(const DiscreteField& w, double q, const Region& region = {});

struct LogTransform {
  double M = 0.0;      // sup u^+
  double k = 0.0;
  double sup_w = 0.0;  // from the nodal values
  double identity_value = 0.0;  // log((M + k) / k)
  bool identity_ok = false;
  double l2_w = 0.0;
};

// w = log((M + k) / (M + k - u^+)); requires k > 0.
LogTransform log_transform_bound(const DiscreteField& u, double k, const Region& region = {});

struct LogTransformSweep {
  std::vector<double> scales;
  std::vector<LogTransform> rows;
  double slope = 0.0;  // of log ||w||_2 against log scale
};

// Zero-boundary solves with (f, F) multiplied by each scale; k is the data
// norm of the scaled problem.
LogTransformSweep log_transform_sweep(const SectionSpec& section, const ProblemData& data,
                                      const std::vector<double>& scales, const SectionMeshOptions& mesh, double r = 0.0);

// ---- Sobolev ------------------------------------------------------------

struct SobolevMember {
  std::string name;
  double ratio = 0.0;
  bool excluded = false;
};

struct SobolevResult {
  double p = 0.0;
  double max_ratio = 0.0;
  std::vector<SobolevMember> members;
};

// ||v||_{L^p} / (int Phi Dv . Dv)^{1/2}.
double sobolev_quotient(const DiscreteField& v, const CofactorField& phi, double p);

// Test family on a mesh of a normalized section: radial bumps of three
// widths about the interior point and smooth random fields cut off at the
// boundary. p = 0 picks 4 for n = 2 and 2n/(n-2) otherwise.
SobolevResult sobolev_ratio(const CofactorField& phi, MeshPtr mesh, double p = 0.0, int random_members = 20,
                            std::uint64_t seed = 1);

// ---- global and interior bounds ---------------------------------------

struct GlobalLinfRow {
  double h = 0.0;
  double linf = 0.0;
  double data_norm = 0.0;
  double ratio = 0.0;  // linf / data_norm
  double h_mesh = 0.0;
};

struct GlobalLinfResult {
  std::vector<GlobalLinfRow> rows;
  double gamma_fit = 0.0;
  double constant = 0.0;  // max linf / (data_norm h^gamma_fit)
  bool degenerate = false;
};

// Zero boundary data on S(x0, h) for each h.
GlobalLinfResult global_linf_experiment(const PotentialPtr& potential, const Vector& x0,
                                        const std::vector<double>& heights, const ProblemData& data,
                                        const SectionMeshOptions& mesh, double r = 0.0);

struct InteriorL2Row {
  double h = 0.0;
  double sup_half = 0.0;  // sup of u over S(x0, h/2)
  double l2 = 0.0;        // ||u||_{L^2(S(x0, h))}
  double bracket = 0.0;
  double ratio = 0.0;
};

struct InteriorL2Result {
  std::vector<InteriorL2Row> rows;
  double band = 0.0;
};

// For each h: solve on S(x0, 2h) and compare sup over S(x0, h/2) with
// h^{-n/4} ||u||_{L^2(S(x0,h))} + h^{1-n/2} ||F||_inf + h^{1-n/(2r)} ||f||_r.
InteriorL2Result interior_l2_experiment(const PotentialPtr& potential, const Vector& x0,
                                        const std::vector<double>& heights, const ProblemData& data,
                                        const SectionMeshOptions& mesh, double r = 0.0);
InteriorL2Row interior_l2_measure(const SectionSolve& solve, double h, const ProblemData& data, double r);

}  // namespace malin
