#pragma once

#include "malin/types.hpp"

#include <memory>
#include <optional>
#include <string>

namespace malin {

// Bounds lambda <= det D^2 phi <= Lambda.
struct PinchBounds {
  double lambda = 1.0;
  double Lambda = 1.0;

  double ratio() const { return Lambda / lambda; }
};

// Value, gradient and Hessian of a potential at one point.
struct Jet {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

// A C^3 convex function with closed-form derivatives. Implementations are
// immutable and may be shared freely between threads.
class ConvexFunction {
 public:
  virtual ~ConvexFunction() = default;

  virtual int dimension() const = 0;
  virtual const std::string& label() const = 0;
  virtual std::string family_name() const = 0;

  // Points where the closed form is valid and the pinch bounds hold.
  virtual bool admissible(const Vector& x) const = 0;

  // Throws DomainError outside the admissible set.
  virtual Jet eval(const Vector& x) const = 0;
  virtual double value(const Vector& x) const { return eval(x).value; }

  virtual PinchBounds declared_pinch() const = 0;
};

using PotentialPtr = std::shared_ptr<const ConvexFunction>;

enum class Family { Quadratic, AnisotropicQuadratic, PerturbedQuadratic, RadialPower };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

// The four built-in closed-form families:
//   Quadratic             |x|^2 / 2
//   AnisotropicQuadratic  sum_i a_i x_i^2 / 2
//   PerturbedQuadratic    |x|^2 / 2 + delta sin(omega . x)
//   RadialPower           |x|^p / p          (admissible away from 0)
// The admissible set is a box; declared pinch bounds are the exact
// extremes of det D^2 phi over that box.
class PotentialSpec final : public ConvexFunction {
 public:
  static PotentialSpec quadratic(int n, std::string label = {});
  static PotentialSpec anisotropic(const Vector& axes, std::string label = {});
  // Rejects amplitudes for which the Hessian fails to be positive definite
  // somewhere on the domain (checked on a sample grid).
  static PotentialSpec perturbed(int n, double amplitude, const Vector& frequency,
                                 std::optional<Box> domain = std::nullopt,
                                 std::string label = {});
  static PotentialSpec radial_power(int n, double exponent,
                                    std::optional<Box> domain = std::nullopt,
                                    std::string label = {});

  int dimension() const override { return n_; }
  const std::string& label() const override { return label_; }
  std::string family_name() const override { return to_string(family_); }
  bool admissible(const Vector& x) const override;
  Jet eval(const Vector& x) const override;
  double value(const Vector& x) const override;
  PinchBounds declared_pinch() const override { return declared_; }

  Family family() const { return family_; }
  const Box& domain() const { return domain_; }
  const Vector& axes() const { return axes_; }
  double amplitude() const { return amplitude_; }
  const Vector& frequency() const { return frequency_; }
  double exponent() const { return exponent_; }

  PotentialPtr share() const { return std::make_shared<PotentialSpec>(*this); }

 private:
  PotentialSpec(Family family, int n, Box domain, std::string label);
  void compute_declared_pinch();

  Family family_;
  int n_;
  Box domain_;
  std::string label_;
  Vector axes_;
  double amplitude_ = 0.0;
  Vector frequency_;
  double exponent_ = 2.0;
  PinchBounds declared_;
};

// Adjugate of a square matrix. For invertible H this is det(H) H^{-1};
// the cofactor formula keeps it defined on singular input.
Matrix cofactor(const Matrix& hessian);

// Phi(x) = cofactor(D^2 phi(x)).
class CofactorField {
 public:
  explicit CofactorField(PotentialPtr potential);

  Matrix operator()(const Vector& x) const;
  int dimension() const { return potential_->dimension(); }
  const ConvexFunction& potential() const { return *potential_; }
  const PotentialPtr& source() const { return potential_; }

 private:
  PotentialPtr potential_;
};

// Min/max of det D^2 phi over a uniform grid of `resolution` points per
// axis. Throws ConvexityError at the first non positive definite Hessian
// and PinchViolation when the sample leaves the declared bounds by more
// than 1e-8 relative.
PinchBounds check_determinant_pinch(const ConvexFunction& potential, const Box& sample_domain,
                                    int resolution);

// (sum_i d_i Phi^{ij})_j by central differences with step fd_step.
Vector divergence_free_residual(const CofactorField& field, const Vector& x, double fd_step);

}  // namespace malin
