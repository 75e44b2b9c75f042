#include "malin/potential.hpp"

#include "malin/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace malin {

namespace {

std::string format_point(const Vector& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

// Range of sin over [lo, hi].
std::pair<double, double> sin_range(double lo, double hi) {
  double smin = std::min(std::sin(lo), std::sin(hi));
  double smax = std::max(std::sin(lo), std::sin(hi));
  constexpr double pi = std::numbers::pi;
  // crest at pi/2 + 2k pi, trough at -pi/2 + 2k pi
  if (std::floor((hi - pi / 2) / (2 * pi)) >= std::ceil((lo - pi / 2) / (2 * pi))) smax = 1.0;
  if (std::floor((hi + pi / 2) / (2 * pi)) >= std::ceil((lo + pi / 2) / (2 * pi))) smin = -1.0;
  return {smin, smax};
}

void check_dimension(int n) {
  if (n < 2 || n > 3) throw ContractError("potential dimension must be 2 or 3");
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::Quadratic: return "Quadratic";
    case Family::AnisotropicQuadratic: return "AnisotropicQuadratic";
    case Family::PerturbedQuadratic: return "PerturbedQuadratic";
    case Family::RadialPower: return "RadialPower";
  }
  return "Unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "Quadratic") return Family::Quadratic;
  if (name == "AnisotropicQuadratic") return Family::AnisotropicQuadratic;
  if (name == "PerturbedQuadratic") return Family::PerturbedQuadratic;
  if (name == "RadialPower") return Family::RadialPower;
  throw ContractError("unknown potential family '" + name + "'");
}

PotentialSpec::PotentialSpec(Family family, int n, Box domain, std::string label)
    : family_(family), n_(n), domain_(std::move(domain)), label_(std::move(label)) {
  if (label_.empty()) label_ = to_string(family_);
}

PotentialSpec PotentialSpec::quadratic(int n, std::string label) {
  check_dimension(n);
  PotentialSpec p(Family::Quadratic, n, Box::cube(n, 1e3), std::move(label));
  p.compute_declared_pinch();
  return p;
}

PotentialSpec PotentialSpec::anisotropic(const Vector& axes, std::string label) {
  const int n = static_cast<int>(axes.size());
  check_dimension(n);
  if ((axes.array() <= 0.0).any()) throw ConvexityError("anisotropic axis coefficients must be positive");
  PotentialSpec p(Family::AnisotropicQuadratic, n, Box::cube(n, 1e3), std::move(label));
  p.axes_ = axes;
  p.compute_declared_pinch();
  return p;
}

PotentialSpec PotentialSpec::perturbed(int n, double amplitude, const Vector& frequency,
                                       std::optional<Box> domain, std::string label) {
  check_dimension(n);
  if (frequency.size() != n) throw ContractError("perturbation frequency has wrong dimension");
  PotentialSpec p(Family::PerturbedQuadratic, n, domain.value_or(Box::cube(n, 2.0)),
                  std::move(label));
  p.amplitude_ = amplitude;
  p.frequency_ = frequency;
  p.compute_declared_pinch();
  // Hypotheses must hold before anything is measured on this potential.
  check_determinant_pinch(p, p.domain_, n == 2 ? 101 : 31);
  return p;
}

PotentialSpec PotentialSpec::radial_power(int n, double exponent, std::optional<Box> domain,
                                          std::string label) {
  check_dimension(n);
  if (!(exponent > 1.0)) throw ConvexityError("radial power exponent must exceed 1");
  Vector center = Vector::Zero(n);
  center[0] = 1.0;
  PotentialSpec p(Family::RadialPower, n, domain.value_or(Box::centered(center, 0.75)),
                  std::move(label));
  if (p.domain_.contains(Vector::Zero(n))) {
    throw DomainError("radial power domain must exclude the origin");
  }
  p.exponent_ = exponent;
  p.compute_declared_pinch();
  check_determinant_pinch(p, p.domain_, n == 2 ? 101 : 31);
  return p;
}

void PotentialSpec::compute_declared_pinch() {
  switch (family_) {
    case Family::Quadratic:
      declared_ = {1.0, 1.0};
      break;
    case Family::AnisotropicQuadratic: {
      const double d = axes_.prod();
      declared_ = {d, d};
      break;
    }
    case Family::PerturbedQuadratic: {
      // D^2 phi = I - delta sin(w.x) w w^T, so det = 1 - delta |w|^2 sin(w.x).
      double lo = 0.0, hi = 0.0;
      for (int i = 0; i < n_; ++i) {
        const double a = frequency_[i] * domain_.lower[i];
        const double b = frequency_[i] * domain_.upper[i];
        lo += std::min(a, b);
        hi += std::max(a, b);
      }
      auto [smin, smax] = sin_range(lo, hi);
      const double c = amplitude_ * frequency_.squaredNorm();
      const double d1 = 1.0 - c * smin;
      const double d2 = 1.0 - c * smax;
      declared_ = {std::min(d1, d2), std::max(d1, d2)};
      break;
    }
    case Family::RadialPower: {
      // det = (p-1) |x|^{n(p-2)}, monotone in |x|.
      Vector nearest = Vector::Zero(n_).cwiseMax(domain_.lower).cwiseMin(domain_.upper);
      Vector farthest(n_);
      for (int i = 0; i < n_; ++i) {
        farthest[i] = std::abs(domain_.lower[i]) > std::abs(domain_.upper[i]) ? domain_.lower[i]
                                                                              : domain_.upper[i];
      }
      const double e = n_ * (exponent_ - 2.0);
      const double d1 = (exponent_ - 1.0) * std::pow(nearest.norm(), e);
      const double d2 = (exponent_ - 1.0) * std::pow(farthest.norm(), e);
      declared_ = {std::min(d1, d2), std::max(d1, d2)};
      break;
    }
  }
  if (!(declared_.lambda > 0.0)) {
    throw ConvexityError("determinant of " + label_ + " is not bounded below by a positive constant");
  }
}

bool PotentialSpec::admissible(const Vector& x) const {
  return x.size() == n_ && domain_.contains(x) && x.allFinite();
}

double PotentialSpec::value(const Vector& x) const {
  if (!admissible(x)) throw DomainError(label_ + ": point " + format_point(x) + " outside admissible domain");
  switch (family_) {
    case Family::Quadratic: return 0.5 * x.squaredNorm();
    case Family::AnisotropicQuadratic: return 0.5 * axes_.dot(x.cwiseProduct(x));
    case Family::PerturbedQuadratic: return 0.5 * x.squaredNorm() + amplitude_ * std::sin(frequency_.dot(x));
    case Family::RadialPower: return std::pow(x.norm(), exponent_) / exponent_;
  }
  return 0.0;
}

Jet PotentialSpec::eval(const Vector& x) const {
  if (!admissible(x)) throw DomainError(label_ + ": point " + format_point(x) + " outside admissible domain");
  Jet j;
  switch (family_) {
    case Family::Quadratic:
      j.value = 0.5 * x.squaredNorm();
      j.gradient = x;
      j.hessian = Matrix::Identity(n_, n_);
      break;
    case Family::AnisotropicQuadratic:
      j.value = 0.5 * axes_.dot(x.cwiseProduct(x));
      j.gradient = axes_.cwiseProduct(x);
      j.hessian = axes_.asDiagonal();
      break;
    case Family::PerturbedQuadratic: {
      const double phase = frequency_.dot(x);
      j.value = 0.5 * x.squaredNorm() + amplitude_ * std::sin(phase);
      j.gradient = x + amplitude_ * std::cos(phase) * frequency_;
      j.hessian = Matrix::Identity(n_, n_) -
                  amplitude_ * std::sin(phase) * frequency_ * frequency_.transpose();
      break;
    }
    case Family::RadialPower: {
      const double r = x.norm();
      const double p = exponent_;
      j.value = std::pow(r, p) / p;
      const double rp2 = std::pow(r, p - 2.0);
      j.gradient = rp2 * x;
      const Vector e = x / r;
      j.hessian = rp2 * (Matrix::Identity(n_, n_) + (p - 2.0) * e * e.transpose());
      break;
    }
  }
  return j;
}

Matrix cofactor(const Matrix& h) {
  const auto n = h.rows();
  if (n == 1) return Matrix::Ones(1, 1);
  Matrix c(n, n);
  if (n == 2) {
    c << h(1, 1), -h(0, 1), -h(1, 0), h(0, 0);
    return c;
  }
  if (n == 3) {
    c(0, 0) = h(1, 1) * h(2, 2) - h(1, 2) * h(2, 1);
    c(0, 1) = h(0, 2) * h(2, 1) - h(0, 1) * h(2, 2);
    c(0, 2) = h(0, 1) * h(1, 2) - h(0, 2) * h(1, 1);
    c(1, 0) = h(1, 2) * h(2, 0) - h(1, 0) * h(2, 2);
    c(1, 1) = h(0, 0) * h(2, 2) - h(0, 2) * h(2, 0);
    c(1, 2) = h(0, 2) * h(1, 0) - h(0, 0) * h(1, 2);
    c(2, 0) = h(1, 0) * h(2, 1) - h(1, 1) * h(2, 0);
    c(2, 1) = h(0, 1) * h(2, 0) - h(0, 0) * h(2, 1);
    c(2, 2) = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
    return c;
  }
  // adj(H)_{ij} = (-1)^{i+j} det(minor_{ji})
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Matrix minor(n - 1, n - 1);
      for (Eigen::Index r = 0, mr = 0; r < n; ++r) {
        if (r == j) continue;
        for (Eigen::Index s = 0, ms = 0; s < n; ++s) {
          if (s == i) continue;
          minor(mr, ms++) = h(r, s);
        }
        ++mr;
      }
      c(i, j) = ((i + j) % 2 ? -1.0 : 1.0) * minor.determinant();
    }
  }
  return c;
}

CofactorField::CofactorField(PotentialPtr potential) : potential_(std::move(potential)) {
  if (!potential_) throw ContractError("cofactor field needs a potential");
}

Matrix CofactorField::operator()(const Vector& x) const { return cofactor(potential_->eval(x).hessian); }

PinchBounds check_determinant_pinch(const ConvexFunction& potential, const Box& sample_domain,
                                    int resolution) {
  if (resolution < 2) throw ContractError("pinch check needs at least 2 samples per axis");
  const int n = potential.dimension();
  if (sample_domain.dimension() != n) throw ContractError("sample box has wrong dimension");

  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -dmin;
  std::vector<int> idx(n, 0);
  Vector x(n);
  for (;;) {
    for (int i = 0; i < n; ++i) {
      const double s = static_cast<double>(idx[i]) / (resolution - 1);
      x[i] = sample_domain.lower[i] + s * (sample_domain.upper[i] - sample_domain.lower[i]);
    }
    const Matrix h = potential.eval(x).hessian;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) {
      throw ConvexityError(potential.label() + ": Hessian not positive definite at " + format_point(x));
    }
    const double d = h.determinant();
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);

    int axis = 0;
    while (axis < n && ++idx[axis] == resolution) idx[axis++] = 0;
    if (axis == n) break;
  }

  const PinchBounds declared = potential.declared_pinch();
  constexpr double rel = 1e-8;
  if (dmin < declared.lambda * (1.0 - rel) || dmax > declared.Lambda * (1.0 + rel)) {
    std::ostringstream os;
    os << potential.label() << ": sampled det D^2 phi in [" << dmin << ", " << dmax
       << "] leaves declared bounds [" << declared.lambda << ", " << declared.Lambda << "]";
    throw PinchViolation(os.str());
  }
  return {dmin, dmax};
}

Vector divergence_free_residual(const CofactorField& field, const Vector& x, double fd_step) {
  if (!(fd_step > 0.0)) throw ContractError("finite-difference step must be positive");
  const int n = field.dimension();
  Vector div = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp[i] += fd_step;
    xm[i] -= fd_step;
    const Matrix d = (field(xp) - field(xm)) / (2.0 * fd_step);
    div += d.row(i).transpose();
  }
  return div;
}

}  // namespace malin
