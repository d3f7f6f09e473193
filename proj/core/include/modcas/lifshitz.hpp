#pragma once

#include <vector>

#include "modcas/materials.hpp"
#include "modcas/matsubara.hpp"

namespace modcas {

// Plane–plane Lifshitz free energy between two homogeneous half-spaces,
// built only from Fresnel coefficients and a continuous radial k∥ integral.
// `derivative` selects F (0), dF/da (1) or d²F/da² (2).
struct LifshitzResult {
  double value = 0.0;         // J/m² (per m of a for each derivative order)
  std::vector<double> per_l;  // weighted Matsubara contributions
};

LifshitzResult lifshitz_terms(const Material& m1, const Material& m2, const Material& gap,
                              double a, const MatsubaraGrid& grid, int derivative = 0);

inline double lifshitz_plane_plane(const Material& m1, const Material& m2, const Material& gap,
                                   double a, const MatsubaraGrid& grid)
{
  return lifshitz_terms(m1, m2, gap, a, grid, 0).value;
}

// −dF/da
inline double lifshitz_pressure(const Material& m1, const Material& m2, const Material& gap,
                                double a, const MatsubaraGrid& grid)
{
  return -lifshitz_terms(m1, m2, gap, a, grid, 1).value;
}

struct FresnelPair {
  double rs, rp;
};
// Reflection of the gap/medium interface at imaginary frequency ξ and
// in-plane wavenumber k. At ξ = 0 a Drude medium gives rp = 1, rs = 0.
FresnelPair fresnel(const Material& medium, const Material& gap, double xi, double k);

} // namespace modcas
