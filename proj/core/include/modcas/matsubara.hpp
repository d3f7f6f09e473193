#pragma once

namespace modcas {

// ξ_l = 2π l k_B T / ħ for l = 0 .. terms-1, with the l = 0 term at half weight.
struct MatsubaraGrid {
  double temperature = 300.0; // K
  int terms = 36;

  double frequency(int l) const;
  double weight(int l) const { return l == 0 ? 0.5 : 1.0; }
  // k_B T, the prefactor of the Matsubara sum
  double thermal_energy() const;
};

void validate(const MatsubaraGrid& grid);

} // namespace modcas
