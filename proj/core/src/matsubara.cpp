#include "modcas/matsubara.hpp"

#include <cmath>

#include "modcas/constants.hpp"
#include "modcas/error.hpp"

namespace modcas {

double MatsubaraGrid::frequency(int l) const
{
  return 2.0 * constants::pi * l * constants::kB * temperature / constants::hbar;
}

double MatsubaraGrid::thermal_energy() const
{
  return constants::kB * temperature;
}

void validate(const MatsubaraGrid& grid)
{
  if (!(grid.temperature > 0.0) || !std::isfinite(grid.temperature))
    throw Error(ErrorCode::ValidationError, "temperature must be positive");
  if (grid.terms < 1)
    throw Error(ErrorCode::ValidationError, "at least one Matsubara term is required");
}

} // namespace modcas
