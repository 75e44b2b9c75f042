#pragma once

#include "malin/types.hpp"

#include <vector>

namespace malin {

struct QuadratureRule {
  // Barycentric coordinates (n+1 entries each) and weights summing to 1.
  std::vector<Vector> points;
  std::vector<double> weights;
};

// Positive-weight symmetric simplex rules. Triangles: exact to degree 1
// (centroid), 2 and 4. Tetrahedra: degree 1 and 2 (higher requests get
// the degree 2 rule).
QuadratureRule simplex_rule(int n, int degree);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace malin
