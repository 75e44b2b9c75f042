#include "malin/solver.hpp"

#include "malin/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace malin {

std::string to_string(DivergenceCertificate::Kind kind) {
  switch (kind) {
    case DivergenceCertificate::Kind::AnalyticallyNonpositive: return "AnalyticallyNonpositive";
    case DivergenceCertificate::Kind::SampledNonpositive: return "SampledNonpositive";
    case DivergenceCertificate::Kind::Unknown: return "Unknown";
  }
  return "Unknown";
}

Vector ProblemData::b(const Vector& x) const { return drift_b ? drift_b(x) : Vector::Zero(x.size()); }
Vector ProblemData::B(const Vector& x) const { return drift_B ? drift_B(x) : Vector::Zero(x.size()); }
Vector ProblemData::F(const Vector& x) const { return flux_F ? flux_F(x) : Vector::Zero(x.size()); }
double ProblemData::f(const Vector& x) const { return source_f ? source_f(x) : 0.0; }
double ProblemData::g(const Vector& x) const { return boundary_g ? boundary_g(x) : 0.0; }

double ProblemData::divergence_B(const Vector& x) const {
  if (div_B) return div_B(x);
  if (!drift_B) return 0.0;
  const double step = 1e-5 * std::max(1.0, x.norm());
  double d = 0.0;
  Vector y = x;
  for (int i = 0; i < x.size(); ++i) {
    y[i] = x[i] + step;
    const double up = drift_B(y)[i];
    y[i] = x[i] - step;
    const double down = drift_B(y)[i];
    y[i] = x[i];
    d += (up - down) / (2.0 * step);
  }
  return d;
}

void validate_certificate(const Mesh& mesh, const ProblemData& data) {
  if (data.divB_certificate.kind != DivergenceCertificate::Kind::SampledNonpositive) return;
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const double d = data.divergence_B(mesh.node(i));
    if (d > data.divB_certificate.tolerance) {
      std::ostringstream os;
      os << "div B <= 0 fails: div B = " << d << " > " << data.divB_certificate.tolerance
         << " at node " << i;
      throw HypothesisError(os.str());
    }
  }
}

namespace {

using Triplet = Eigen::Triplet<double>;

struct ElementOutput {
  std::vector<Triplet> triplets;
  Vector load;
};

void check_finite(bool ok, std::size_t k, const char* what) {
  if (!ok) {
    throw AssemblyError(std::string("non-finite ") + what + " sample on simplex " + std::to_string(k));
  }
}

void assemble_range(const Mesh& mesh, const ProblemData& data, AssemblyForm form, std::size_t begin,
                    std::size_t end, ElementOutput& out) {
  const int n = mesh.dimension();
  const double share = 1.0 / (n + 1);
  out.load = Vector::Zero(static_cast<Eigen::Index>(mesh.node_count()));
  out.triplets.reserve((end - begin) * (n + 1) * (n + 1));
  for (std::size_t k = begin; k < end; ++k) {
    const SimplexGeometry geo = simplex_geometry(mesh, k);
    const auto s = mesh.simplex(k);
    const Vector& xc = geo.centroid;
    const Matrix phi = data.cofactor(xc);
    check_finite(phi.allFinite(), k, "cofactor");
    const Vector b = data.b(xc);
    const Vector B = data.B(xc);
    const Vector F = data.F(xc);
    const double f = data.f(xc);
    check_finite(b.allFinite() && B.allFinite(), k, "drift");
    check_finite(F.allFinite() && std::isfinite(f), k, "source");
    const double vol = geo.measure;
    const Matrix& G = geo.gradients;
    const Matrix phiG = phi * G;
    Vector drift = b;
    double reaction = 0.0;
    if (form == AssemblyForm::Nondivergence) {
      drift = b - B;
      reaction = -data.divergence_B(xc);
      check_finite(std::isfinite(reaction), k, "div B");
    }
    for (int i = 0; i <= n; ++i) {
      const Vector gi = G.col(i);
      for (int j = 0; j <= n; ++j) {
        double a = vol * gi.dot(phiG.col(j));            // Phi Du . Dv
        a += vol * share * drift.dot(G.col(j));           // (b . Du) v
        if (form == AssemblyForm::Divergence) {
          a += vol * share * B.dot(gi);                   // u B . Dv
        } else {
          a += vol * share * share * reaction;            // -(div B) u v
        }
        out.triplets.emplace_back(s[i], s[j], a);
      }
      out.load[s[i]] += vol * (F.dot(gi) + share * f);
    }
  }
}

}  // namespace

LinearSystem assemble(const Mesh& mesh, const ProblemData& data, AssemblyForm form, bool dirichlet) {
  const std::size_t count = mesh.simplex_count();
  const auto nodes = static_cast<Eigen::Index>(mesh.node_count());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, std::max<std::size_t>(1, count / 2000));
  std::vector<ElementOutput> parts(workers);
  if (workers == 1) {
    assemble_range(mesh, data, form, 0, count, parts[0]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          assemble_range(mesh, data, form, count * w / workers, count * (w + 1) / workers, parts[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  // contributions are merged in simplex order regardless of the split
  std::vector<Triplet> triplets;
  LinearSystem sys;
  sys.load = Vector::Zero(nodes);
  for (auto& p : parts) {
    triplets.insert(triplets.end(), p.triplets.begin(), p.triplets.end());
    sys.load += p.load;
  }
  if (dirichlet) {
    std::vector<Triplet> kept;
    kept.reserve(triplets.size());
    for (const auto& t : triplets) {
      if (!mesh.on_boundary(static_cast<std::size_t>(t.row()))) kept.push_back(t);
    }
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      if (!mesh.on_boundary(i)) continue;
      kept.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
      const double g = data.g(mesh.node(i));
      if (!std::isfinite(g)) throw AssemblyError("non-finite boundary value at node " + std::to_string(i));
      sys.load[static_cast<Eigen::Index>(i)] = g;
    }
    triplets.swap(kept);
  }
  sys.matrix.resize(nodes, nodes);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  return sys;
}

namespace {

double relative_residual(const Eigen::SparseMatrix<double>& a, const Vector& x, const Vector& rhs) {
  const double scale = rhs.norm();
  const double r = (a * x - rhs).norm();
  return scale > 0.0 ? r / scale : r;
}

double one_norm(const Eigen::SparseMatrix<double>& a) {
  double m = 0.0;
  for (int j = 0; j < a.outerSize(); ++j) {
    double s = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) s += std::abs(it.value());
    m = std::max(m, s);
  }
  return m;
}

// Hager's estimate of ||A^{-1}||_1 using solves with A and A^T.
template <class Solver>
double inverse_one_norm(Solver& lu, Eigen::Index size) {
  Vector x = Vector::Constant(size, 1.0 / static_cast<double>(size));
  double est = 0.0;
  for (int it = 0; it < 5; ++it) {
    const Vector y = lu.solve(x);
    est = y.lpNorm<1>();
    Vector xi = y.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
    const Vector z = lu.transpose().solve(xi);
    Eigen::Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x)) break;
    x.setZero();
    x[j] = 1.0;
  }
  return est;
}

double peclet(const Mesh& mesh, const ProblemData& data, std::size_t k) {
  const SimplexGeometry geo = simplex_geometry(mesh, k);
  const Vector v = data.b(geo.centroid) - data.B(geo.centroid);
  const double speed = v.norm();
  if (speed == 0.0) return 0.0;
  const Matrix phi = data.cofactor(geo.centroid);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (phi + phi.transpose()), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return speed * mesh.diameter(k) / (2.0 * lo);
}

Vector sample_test_field(const Mesh& mesh) {
  Vector v(static_cast<Eigen::Index>(mesh.node_count()));
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    v[static_cast<Eigen::Index>(i)] = mesh.on_boundary(i) ? 0.0 : std::sin(1.0 + 0.7 * static_cast<double>(i));
  }
  return v;
}

}  // namespace

SolveResult solve_dirichlet(MeshPtr mesh, const ProblemData& data, const SolveOptions& opt) {
  if (!mesh) throw ContractError("solve needs a mesh");
  validate_certificate(*mesh, data);
  const LinearSystem sys = assemble(*mesh, data, opt.form, true);
  const auto size = sys.matrix.rows();

  SolveResult out(DiscreteField::zero(mesh));
  Vector x;
  if (static_cast<std::size_t>(size) < opt.direct_limit) {
    out.method = "SparseLU";
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(sys.matrix);
    lu.factorize(sys.matrix);
    if (lu.info() != Eigen::Success) throw FactorizationError("sparse LU failed: " + lu.lastErrorMessage());
    if (opt.estimate_condition) {
      out.condition_estimate = one_norm(sys.matrix) * inverse_one_norm(lu, size);
      if (!(out.condition_estimate <= opt.max_condition)) {
        std::ostringstream os;
        os << "condition estimate " << out.condition_estimate << " exceeds " << opt.max_condition;
        throw ConditioningError(os.str());
      }
    }
    x = lu.solve(sys.load);
    out.residual = relative_residual(sys.matrix, x, sys.load);
    // a few sweeps of iterative refinement when rounding leaves the residual high
    while (out.residual > opt.tolerance && out.iterations < 3) {
      x += lu.solve(sys.load - sys.matrix * x);
      out.residual = relative_residual(sys.matrix, x, sys.load);
      ++out.iterations;
    }
  } else {
    out.method = "BiCGSTAB+ILUT";
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-6);
    it.preconditioner().setFillfactor(20);
    it.setTolerance(opt.tolerance);
    it.setMaxIterations(opt.max_iterations);
    it.compute(sys.matrix);
    if (it.info() != Eigen::Success) throw FactorizationError("incomplete LU preconditioner failed");
    x = it.solve(sys.load);
    out.iterations = static_cast<int>(it.iterations());
    out.residual = relative_residual(sys.matrix, x, sys.load);
  }
  if (!x.allFinite() || !(out.residual <= opt.tolerance)) {
    throw ConvergenceError("linear solve did not reach the residual tolerance", out.residual);
  }
  out.solution = DiscreteField(mesh, x);

  for (std::size_t k = 0; k < mesh->simplex_count(); ++k) out.max_peclet = std::max(out.max_peclet, peclet(*mesh, data, k));
  out.peclet_warning = out.max_peclet > 2.0;

  const DiscreteField v(mesh, sample_test_field(*mesh));
  const double r = weak_residual(out.solution, data, v, opt.form);
  const double scale = std::max(1.0, x.norm()) * std::max(1.0, v.values().norm());
  out.weak_residual_sample = r / scale;
  return out;
}

MaximumPrincipleReport maximum_principle_check(const SolveResult& result, const ProblemData& data) {
  const DiscreteField& u = result.solution;
  const Mesh& mesh = u.mesh();
  if (!data.divB_certificate.nonpositive()) {
    throw ContractError("maximum principle check needs a nonpositive div B certificate");
  }
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const Vector& x = mesh.node(i);
    if (data.f(x) != 0.0 || data.F(x).norm() != 0.0) {
      throw ContractError("maximum principle check needs f = 0 and F = 0");
    }
  }
  MaximumPrincipleReport rep;
  for (std::size_t i = 0; i < mesh.node_count() && rep.two_sided; ++i) {
    rep.two_sided = std::abs(data.divergence_B(mesh.node(i))) <= 1e-12;
  }
  rep.boundary_max = -std::numeric_limits<double>::infinity();
  rep.boundary_min = std::numeric_limits<double>::infinity();
  rep.max_value = -std::numeric_limits<double>::infinity();
  rep.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > rep.max_value) {
      rep.max_value = u[i];
      rep.argmax = i;
    }
    if (u[i] < rep.min_value) {
      rep.min_value = u[i];
      rep.argmin = i;
    }
    if (mesh.on_boundary(i)) {
      rep.boundary_max = std::max(rep.boundary_max, u[i]);
      rep.boundary_min = std::min(rep.boundary_min, u[i]);
    }
  }
  double upper = rep.boundary_max, lower = rep.boundary_min;
  if (!rep.two_sided) {
    upper = std::max(upper, 0.0);
    lower = std::min(lower, 0.0);
  }
  // Relative to the range, floored by the magnitude so constant solutions
  // are not judged at zero tolerance.
  const double scale = std::max(rep.max_value - rep.min_value, std::max(std::abs(rep.max_value), std::abs(rep.min_value)));
  const double tol = 1e-8 * scale;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (mesh.on_boundary(i)) continue;
    const double excess = std::max(u[i] - upper, lower - u[i]);
    if (excess > rep.violation) {
      rep.violation = excess;
      rep.worst_node = i;
    }
  }
  rep.max_on_boundary = rep.max_value <= upper + tol;
  rep.min_on_boundary = rep.min_value >= lower - tol;
  rep.pass = rep.violation <= tol;
  if (rep.pass) rep.worst_node.reset();
  return rep;
}

double weak_residual(const DiscreteField& u, const ProblemData& data, const DiscreteField& v, AssemblyForm form) {
  const Mesh& mesh = u.mesh();
  if (&v.mesh() != &mesh) throw ContractError("test field lives on a different mesh");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mesh.on_boundary(i) && v[i] != 0.0) {
      throw ContractError("test field is nonzero at boundary node " + std::to_string(i));
    }
  }
  const LinearSystem raw = assemble(mesh, data, form, false);
  return v.values().dot(raw.matrix * u.values() - raw.load);
}

double weak_residual(const SolveResult& result, const ProblemData& data, const DiscreteField& v, AssemblyForm form) {
  return weak_residual(result.solution, data, v, form);
}

}  // namespace malin
