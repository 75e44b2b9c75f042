#include "malin/geometry.hpp"

#include "malin/errors.hpp"
#include "malin/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace malin {

SectionLevel::SectionLevel(PotentialPtr potential, Vector center)
    : potential_(std::move(potential)), center_(std::move(center)) {
  const Jet j = potential_->eval(center_);
  value0_ = j.value;
  gradient0_ = j.gradient;
}

double SectionLevel::operator()(const Vector& y) const {
  return potential_->value(y) - value0_ - gradient0_.dot(y - center_);
}

bool SectionLevel::inside(const Vector& y, double height) const {
  return potential_->admissible(y) && (*this)(y) < height;
}

double section_radius(const SectionLevel& level, double height, const Vector& dir) {
  if (!(height > 0.0)) throw ContractError("section height must be positive");
  const ConvexFunction& phi = level.potential();
  const Vector& x0 = level.center();
  auto point = [&](double t) -> Vector { return x0 + t * dir; };

  double lo = 0.0;
  double hi = std::sqrt(2.0 * height) * 0.5;
  for (int k = 0;; ++k) {
    if (k > 200) throw SectionError("section ray did not reach the level");
    if (!phi.admissible(point(hi))) {
      // last admissible point on [lo, hi]
      double a = lo, b = hi;
      for (int i = 0; i < 200 && b - a > 1e-15 * b; ++i) {
        const double m = 0.5 * (a + b);
        (phi.admissible(point(m)) ? a : b) = m;
      }
      if (level(point(a)) < height) {
        throw SectionError("section not compactly contained: ray from center exits the domain of " +
                           phi.label());
      }
      hi = a;
      break;
    }
    if (level(point(hi)) >= height) break;
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 300; ++i) {
    const double m = 0.5 * (lo + hi);
    if (m <= lo || m >= hi) break;
    (level(point(m)) < height ? lo : hi) = m;
  }
  // return the endpoint with the smaller height residual
  return std::abs(level(point(lo)) - height) <= std::abs(level(point(hi)) - height) ? lo : hi;
}

double section_radius(const SectionSpec& spec, const Vector& dir) {
  return section_radius(SectionLevel(spec.potential, spec.center), spec.height, dir);
}

Polytope extract_section(const SectionSpec& spec, int resolution) {
  const int n = spec.potential->dimension();
  if (n == 2 && resolution < 16) throw ContractError("n = 2 sections need at least 16 rays");
  if (n == 3 && resolution < 64) throw ContractError("n = 3 sections need at least 64 surface samples");
  const SectionLevel level(spec.potential, spec.center);
  std::vector<Vector> pts;
  pts.reserve(resolution);
  for (const auto& d : sphere_directions(n, resolution)) {
    pts.push_back(spec.center + section_radius(level, spec.height, d) * d);
  }
  return Polytope(n, std::move(pts), Provenance::SectionLevelSet, spec.center);
}

double section_volume(const SectionSpec& spec, int resolution) {
  const int n = spec.potential->dimension();
  const SectionLevel level(spec.potential, spec.center);
  const auto dirs = sphere_directions(n, n == 2 ? resolution : resolution * resolution / 4);
  double sum = 0.0;
  for (const auto& d : dirs) sum += std::pow(section_radius(level, spec.height, d), n);
  if (n == 2) return 0.5 * sum * 2.0 * std::numbers::pi / static_cast<double>(dirs.size());
  return sum / 3.0 * 4.0 * std::numbers::pi / static_cast<double>(dirs.size());
}

Ellipsoid minimum_volume_ellipsoid(const std::vector<Vector>& points, double tolerance,
                                   int max_iterations) {
  const int m = static_cast<int>(points.size());
  if (m == 0) throw ContractError("no points for enclosing ellipsoid");
  const int n = static_cast<int>(points[0].size());
  const int d = n + 1;

  Matrix q(d, m);
  for (int j = 0; j < m; ++j) {
    q.col(j).head(n) = points[j];
    q(n, j) = 1.0;
  }
  Vector u = Vector::Constant(m, 1.0 / m);

  Matrix x_inv;
  Vector kappa(m);
  auto refresh = [&] {
    const Matrix x = q * u.asDiagonal() * q.transpose();
    Eigen::LDLT<Matrix> ldlt(x);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
      throw ConditioningError("enclosing ellipsoid: points do not span the space");
    }
    x_inv = ldlt.solve(Matrix::Identity(d, d));
    kappa = (q.transpose() * x_inv).cwiseProduct(q.transpose()).rowwise().sum();
  };
  refresh();

  for (int it = 0; it < max_iterations; ++it) {
    Eigen::Index jp = 0;
    const double kp = kappa.maxCoeff(&jp);
    Eigen::Index jm = -1;
    double km = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      if (u[j] > 0.0 && kappa[j] < km) {
        km = kappa[j];
        jm = j;
      }
    }
    const double eps_plus = kp / d - 1.0;
    const double eps_minus = 1.0 - km / d;
    if (std::max(eps_plus, eps_minus) <= tolerance) break;

    const Eigen::Index j = eps_plus >= eps_minus ? jp : jm;
    const double kj = kappa[j];
    double beta = (kj - d) / (d * (kj - 1.0));
    if (beta < 0.0) beta = std::max(beta, -u[j] / (1.0 - u[j]));

    // X <- (1 - beta) X + beta q_j q_j^T, Sherman-Morrison on X^{-1} and kappa.
    const Vector y = x_inv * q.col(j);
    const double denom = (1.0 - beta) + beta * kj;
    const Vector g = q.transpose() * y;
    kappa = (kappa - (beta / denom) * g.cwiseProduct(g)) / (1.0 - beta);
    x_inv = (x_inv - (beta / denom) * y * y.transpose()) / (1.0 - beta);
    u *= (1.0 - beta);
    u[j] += beta;
    if (u[j] < 1e-300) u[j] = 0.0;
    if (it % 500 == 499) refresh();
  }

  Matrix p(n, m);
  for (int j = 0; j < m; ++j) p.col(j) = points[j];
  const Vector c = p * u;
  const Matrix sigma = p * u.asDiagonal() * p.transpose() - c * c.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(static_cast<double>(n) * sigma);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw ConditioningError("enclosing ellipsoid is degenerate");
  Matrix shape = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() *
                 eig.eigenvectors().transpose();

  const Matrix shape_inv = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                           eig.eigenvectors().transpose();
  double worst = 0.0;
  for (const auto& pt : points) worst = std::max(worst, (shape_inv * (pt - c)).norm());
  if (worst > 1.0) shape *= worst;
  return {c, shape};
}

NormalizedBody john_normalize(const Polytope& body) {
  const int n = body.dimension();
  const Ellipsoid e = minimum_volume_ellipsoid(body.vertices());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(e.shape, Eigen::EigenvaluesOnly);
  const double thinness = eig.eigenvalues().minCoeff() / eig.eigenvalues().maxCoeff();
  if (!(thinness > 1e-9)) {
    std::ostringstream os;
    os << "body is too thin to normalize (thinness ratio " << thinness << ")";
    throw ConditioningError(os.str());
  }
  // In MVEE coordinates the body sits inside B_1 and contains B_r about the
  // origin with r >= 1/n; shrink by r so the inner ball becomes B_1.
  const AffineMap to_ellipsoid(e.shape, e.center);
  const Polytope in_ball = body.transformed(to_ellipsoid.inverse());
  const double r = in_ball.boundary_distance(Vector::Zero(n));
  if (!(r > 0.0)) throw ConditioningError("enclosing ellipsoid center lies outside the body");
  const double s = std::min(1.0, r);
  AffineMap t(s * e.shape, e.center);
  Polytope normalized = body.transformed(t.inverse());
  const NormalizationCheck chk = verify_normalized(normalized, 1e-6);
  if (!chk.ok) {
    std::ostringstream os;
    os << "normalization failed: supports in [" << chk.min_support << ", " << chk.max_support << "]";
    throw ConditioningError(os.str());
  }
  return {std::move(t), std::move(normalized)};
}

NormalizationCheck verify_normalized(const Polytope& body, double tolerance, int directions) {
  const int n = body.dimension();
  if (directions <= 0) directions = n == 2 ? 720 : 2000;
  NormalizationCheck out;
  out.min_support = std::numeric_limits<double>::infinity();
  out.max_support = -out.min_support;
  auto probe = [&](const Vector& u) {
    const double s = body.support(u);
    if (s < out.min_support) {
      out.min_support = s;
      out.min_direction = u;
    }
    if (s > out.max_support) {
      out.max_support = s;
      out.max_direction = u;
    }
  };
  for (const auto& u : sphere_directions(n, directions)) probe(u);
  for (const auto& f : body.facets()) probe(f.normal);
  for (const auto& v : body.vertices()) {
    if (v.norm() > 0) probe(v.normalized());
  }
  out.ok = out.min_support >= 1.0 - tolerance && out.max_support <= n + tolerance;
  return out;
}

double VolumeScaling::min_ratio() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) r = std::min(r, row.ratio);
  return r;
}

double VolumeScaling::max_ratio() const {
  double r = 0.0;
  for (const auto& row : rows) r = std::max(r, row.ratio);
  return r;
}

VolumeScaling section_volume_scaling(const PotentialPtr& potential, const Vector& x0,
                                     const std::vector<double>& heights, int resolution) {
  const int n = potential->dimension();
  VolumeScaling out;
  for (double h : heights) {
    const double vol = section_volume({potential, x0, h}, resolution);
    out.rows.push_back({h, vol, vol / std::pow(h, 0.5 * n)});
  }
  return out;
}

BallInclusion ball_inclusion_check(const PotentialPtr& potential, const Vector& x0, double h, double t,
                                   double alpha, int resolution) {
  if (!(t > 0.0) || t > 0.5 * h * (1.0 + 1e-12)) throw ContractError("ball inclusion needs 0 < t <= h/2");
  if (!(alpha > 0.0)) throw ContractError("alpha must be positive");
  const double e = 1.0 / (1.0 + alpha);
  auto inradius = [&](double height) {
    return extract_section({potential, x0, height}, resolution).boundary_distance(x0);
  };
  BallInclusion out;
  out.constant = inradius(0.5 * h) / std::pow(0.5 * h, e);
  out.required_radius = out.constant * std::pow(t, e);
  out.measured_inradius = inradius(t);
  out.pass = out.measured_inradius >= out.required_radius * (1.0 - 1e-6);
  return out;
}

std::string GeometryReport::csv_header() { return "family,h,volume,ratio,inner_r,outer_r"; }

std::string GeometryReport::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << family << ',' << height << ',' << volume << ',' << ratio << ',' << inner_radius << ','
     << outer_radius;
  return os.str();
}

GeometryReport geometry_report(const PotentialPtr& potential, const Vector& x0, double h, double alpha,
                               int resolution) {
  const int n = potential->dimension();
  const SectionSpec spec{potential, x0, h};
  const Polytope body = extract_section(spec, n == 2 ? resolution : std::max(64, resolution / 2));
  const NormalizedBody nb = john_normalize(body);
  const NormalizationCheck chk = verify_normalized(nb.normalized, 1e-6);

  GeometryReport r;
  r.family = potential->label();
  r.height = h;
  r.volume = section_volume(spec, n == 2 ? resolution : 64);
  r.ratio = r.volume / std::pow(h, 0.5 * n);
  r.inner_radius = chk.min_support;
  r.outer_radius = chk.max_support;
  r.ball_radius = body.boundary_distance(x0);
  r.alpha_used = alpha;
  return r;
}

std::vector<IntegrabilityEntry> estimate_hessian_integrability(const SectionSpec& section,
                                                               const std::vector<double>& epsilons,
                                                               int resolution) {
  for (double e : epsilons) {
    if (!(e >= 0.0)) throw ContractError("integrability exponents must be nonnegative");
  }
  const int n = section.potential->dimension();
  const SectionLevel level(section.potential, section.center);

  auto integrate = [&](int res) {
    std::vector<double> gx, gw;
    gauss_legendre(res, gx, gw);
    const auto dirs = sphere_directions(n, n == 2 ? res : 2 * res * res);
    const double dir_weight =
        (n == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi) / static_cast<double>(dirs.size());
    std::vector<double> sums(epsilons.size(), 0.0);
    std::vector<bool> bad(epsilons.size(), false);
    for (const auto& d : dirs) {
      const double r = section_radius(level, section.height, d);
      for (int k = 0; k < res; ++k) {
        const double rho = 0.5 * r * (gx[k] + 1.0);
        const double w = 0.5 * r * gw[k] * std::pow(rho, n - 1) * dir_weight;
        double norm = std::numeric_limits<double>::quiet_NaN();
        try {
          norm = section.potential->eval(section.center + rho * d).hessian.norm();
        } catch (const DomainError&) {
        }
        for (std::size_t e = 0; e < epsilons.size(); ++e) {
          const double v = std::pow(norm, 1.0 + epsilons[e]);
          if (!std::isfinite(v)) bad[e] = true;
          else sums[e] += w * v;
        }
      }
    }
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      if (bad[e]) sums[e] = std::numeric_limits<double>::infinity();
    }
    return sums;
  };

  const auto coarse = integrate(resolution);
  const auto fine = integrate(2 * resolution);
  std::vector<IntegrabilityEntry> out;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    IntegrabilityEntry entry;
    entry.epsilon = epsilons[e];
    entry.integral = coarse[e];
    entry.refined_integral = fine[e];
    entry.divergent = !std::isfinite(coarse[e]) || !std::isfinite(fine[e]);
    entry.stable = !entry.divergent && std::abs(fine[e] - coarse[e]) <= 1e-3 * std::abs(fine[e]);
    out.push_back(entry);
  }
  return out;
}

}  // namespace malin
