#include "modcas/quadrature.hpp"

#include <cmath>
#include <map>

#include "modcas/constants.hpp"
#include "modcas/error.hpp"

namespace modcas {

GaussLegendreRule gauss_legendre(int n)
{
  if (n < 1)
    throw Error(ErrorCode::ValidationError, "Gauss-Legendre rule needs n >= 1");
  GaussLegendreRule r;
  if (n == 1) {
    r.x = {0.0};
    r.w = {2.0};
    return r;
  }
  r.x.assign(static_cast<std::size_t>(n), 0.0);
  r.w.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton on P_n from the Tricomi initial guess, largest root first
    double z = std::cos(constants::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
        break;
    }
    if (2 * i + 1 == n)
      z = 0.0;
    // recompute the derivative at the converged root
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x[static_cast<std::size_t>(n - 1 - i)] = z;
    r.x[static_cast<std::size_t>(i)] = -z;
    r.w[static_cast<std::size_t>(n - 1 - i)] = w;
    r.w[static_cast<std::size_t>(i)] = w;
  }
  return r;
}

std::vector<QuadratureNode> BZQuadrature::nodes(const UnitCell& cell) const
{
  if (nodes_per_dim < 1)
    throw Error(ErrorCode::ValidationError, "quadrature needs at least one node per dimension");
  const double X = constants::pi / cell.Lx, Y = constants::pi / cell.Ly;
  const auto g = gauss_legendre(nodes_per_dim);
  std::vector<QuadratureNode> out;
  if (scheme == BZScheme::gauss_legendre) {
    for (std::size_t i = 0; i < g.x.size(); ++i)
      for (std::size_t j = 0; j < g.x.size(); ++j)
        out.push_back({X * g.x[i], Y * g.x[j], X * Y * g.w[i] * g.w[j]});
    return out;
  }
  if (grading < 1)
    throw Error(ErrorCode::ValidationError, "grading exponent must be >= 1");
  // Each quadrant splits along its diagonal into two triangles with the
  // singular vertex at the origin: (x, y) = (X u, Y u v) or (X u v, Y u),
  // Jacobian X Y u, and u = s^p concentrates nodes near the centre.
  const int p = grading;
  const double sx[4] = {1, -1, -1, 1}, sy[4] = {1, 1, -1, -1};
  for (int quad = 0; quad < 4; ++quad)
    for (int tri = 0; tri < 2; ++tri)
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double s = 0.5 * (g.x[i] + 1.0);
        const double u = std::pow(s, p);
        const double du = p * std::pow(s, p - 1) * 0.5 * g.w[i];
        for (std::size_t j = 0; j < g.x.size(); ++j) {
          const double v = 0.5 * (g.x[j] + 1.0);
          const double dv = 0.5 * g.w[j];
          const double a = u, b = u * v;
          const double x = tri == 0 ? a : b, y = tri == 0 ? b : a;
          out.push_back({sx[quad] * X * x, sy[quad] * Y * y, X * Y * u * du * dv});
        }
      }
  return out;
}

std::vector<QuadratureNode> fold_nodes(const std::vector<QuadratureNode>& nodes,
                                       const CellSymmetry& sym)
{
  const bool swap = sym.swap_xy && sym.mirror_x && sym.mirror_y;
  std::map<std::pair<double, double>, std::size_t> index;
  std::vector<QuadratureNode> out;
  for (const auto& n : nodes) {
    double x = sym.mirror_x ? std::abs(n.kx) : n.kx;
    double y = sym.mirror_y ? std::abs(n.ky) : n.ky;
    if (swap && y > x)
      std::swap(x, y);
    const auto key = std::make_pair(x, y);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, out.size());
      out.push_back({x, y, n.weight});
    } else {
      out[it->second].weight += n.weight;
    }
  }
  return out;
}

} // namespace modcas
