#pragma once

#include "malin/types.hpp"

namespace malin {

// T x = A x + c, with det A and A^{-1} cached at construction.
class AffineMap {
 public:
  AffineMap(Matrix a, Vector c);  // throws MapError when A is singular

  static AffineMap identity(int n);
  static AffineMap scaling(int n, double s);

  int dimension() const { return static_cast<int>(c_.size()); }
  const Matrix& matrix() const { return a_; }
  const Vector& translation() const { return c_; }
  const Matrix& inverse_matrix() const { return a_inv_; }
  double determinant() const { return det_; }

  Vector apply(const Vector& x) const { return a_ * x + c_; }
  Vector apply_inverse(const Vector& y) const { return a_inv_ * (y - c_); }

  // (this o other)(x) = this(other(x))
  AffineMap compose(const AffineMap& other) const;
  AffineMap inverse() const;

  double operator_norm() const;          // largest singular value of A
  double inverse_operator_norm() const;  // largest singular value of A^{-1}

 private:
  Matrix a_;
  Vector c_;
  Matrix a_inv_;
  double det_;
};

}  // namespace malin
