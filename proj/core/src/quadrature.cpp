#include "malin/quadrature.hpp"

#include "malin/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace malin {

namespace {

void add_orbit3(QuadratureRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  Vector p(3);
  p << a, a, b; r.points.push_back(p); r.weights.push_back(w);
  p << a, b, a; r.points.push_back(p); r.weights.push_back(w);
  p << b, a, a; r.points.push_back(p); r.weights.push_back(w);
}

}  // namespace

QuadratureRule simplex_rule(int n, int degree) {
  QuadratureRule r;
  if (degree <= 1) {
    r.points.push_back(Vector::Constant(n + 1, 1.0 / (n + 1)));
    r.weights.push_back(1.0);
    return r;
  }
  if (n == 2) {
    if (degree == 2) {
      add_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
      return r;
    }
    // Dunavant 6-point, degree 4
    add_orbit3(r, 0.445948490915965, 0.223381589678011);
    add_orbit3(r, 0.091576213509771, 0.109951743655322);
    return r;
  }
  if (n == 3) {
    const double a = 0.5854101966249685, b = 0.1381966011250105;
    for (int k = 0; k < 4; ++k) {
      Vector p = Vector::Constant(4, b);
      p[k] = a;
      r.points.push_back(p);
      r.weights.push_back(0.25);
    }
    return r;
  }
  throw ContractError("no simplex rule for this dimension");
}

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights) {
  Matrix j = Matrix::Zero(count, count);
  for (int k = 1; k < count; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = j(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(j);
  nodes.resize(count);
  weights.resize(count);
  for (int k = 0; k < count; ++k) {
    nodes[k] = eig.eigenvalues()[k];
    const double v0 = eig.eigenvectors()(0, k);
    weights[k] = 2.0 * v0 * v0;
  }
}

}  // namespace malin
