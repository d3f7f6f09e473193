#pragma once

#include <vector>

#include "modcas/geometry.hpp"

namespace modcas {

// n-point Gauss–Legendre rule on [-1, 1]; nodes ascending and exactly
// antisymmetric (x[n-1-i] == -x[i]).
struct GaussLegendreRule {
  std::vector<double> x, w;
};
GaussLegendreRule gauss_legendre(int n);

enum class BZScheme {
  gauss_legendre, // product rule over the whole zone
  graded_center,  // Duffy-graded rule resolving the |k| kink at the zone centre
};

struct QuadratureNode {
  double kx, ky, weight;
};

struct BZQuadrature {
  BZScheme scheme = BZScheme::gauss_legendre;
  int nodes_per_dim = 16;
  int grading = 3; // graded_center only: radial map u = s^grading

  // Weights sum to the zone area (2π/Lx)(2π/Ly).
  std::vector<QuadratureNode> nodes(const UnitCell& cell) const;
};

// Merges nodes related by the given symmetries, summing their weights. The
// representative of each orbit is its first member in input order.
std::vector<QuadratureNode> fold_nodes(const std::vector<QuadratureNode>& nodes,
                                       const CellSymmetry& sym);

} // namespace modcas
