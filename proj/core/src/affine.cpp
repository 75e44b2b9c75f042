#include "malin/affine.hpp"

#include "malin/errors.hpp"

#include <cmath>

namespace malin {

AffineMap::AffineMap(Matrix a, Vector c) : a_(std::move(a)), c_(std::move(c)) {
  if (a_.rows() != a_.cols() || a_.rows() != c_.size()) throw MapError("affine map shape mismatch");
  Eigen::FullPivLU<Matrix> lu(a_);
  det_ = a_.determinant();
  if (!lu.isInvertible() || det_ == 0.0 || !std::isfinite(det_)) {
    throw MapError("affine map is singular");
  }
  a_inv_ = lu.inverse();
}

AffineMap AffineMap::identity(int n) { return {Matrix::Identity(n, n), Vector::Zero(n)}; }

AffineMap AffineMap::scaling(int n, double s) { return {s * Matrix::Identity(n, n), Vector::Zero(n)}; }

AffineMap AffineMap::compose(const AffineMap& other) const {
  return {a_ * other.a_, a_ * other.c_ + c_};
}

AffineMap AffineMap::inverse() const { return {a_inv_, -a_inv_ * c_}; }

double AffineMap::operator_norm() const {
  Eigen::JacobiSVD<Matrix> svd(a_);
  return svd.singularValues()(0);
}

double AffineMap::inverse_operator_norm() const {
  Eigen::JacobiSVD<Matrix> svd(a_);
  return 1.0 / svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace malin
