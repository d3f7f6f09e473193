#pragma once

#include <string>

#include "modcas/free_energy.hpp"
#include "modcas/geometry.hpp"
#include "modcas/materials.hpp"

namespace modcas::testing {

inline LayerStack half_space(double period, const std::string& gap, const std::string& body)
{
  return LayerStack{{period, period}, gap, {}, body};
}

// Lamellar grating: strips along y of width f·L centred in the cell.
inline LayerStack strip_grating(double period, double f, double depth, const std::string& gap,
                                const std::string& body)
{
  LayerSpec layer{depth, gap, {{body, 0.5 * period * (1 - f), 0.0, f * period, period}}};
  return LayerStack{{period, period}, gap, {layer}, body};
}

// Square pillars of side s centred in the cell, on a substrate of the same material.
inline LayerStack pillars(double period, double side, double depth, const std::string& gap,
                          const std::string& body)
{
  const double o = 0.5 * (period - side);
  LayerSpec layer{depth, gap, {{body, o, o, side, side}}};
  return LayerStack{{period, period}, gap, {layer}, body};
}

// Free-standing film of the body material pierced by square holes of side s.
inline LayerStack membrane(double period, double side, double depth, const std::string& gap,
                           const std::string& body)
{
  const double o = 0.5 * (period - side);
  LayerSpec layer{depth, body, {{gap, o, o, side, side}}};
  return LayerStack{{period, period}, gap, {layer}, gap};
}

inline CasimirSetup facing(LayerStack lower, LayerStack upper, const std::string& gap = "vacuum")
{
  return CasimirSetup{std::move(lower), std::move(upper), gap, MaterialTable::with_presets()};
}

inline CasimirSetup plane_plane(const std::string& m1, const std::string& m2,
                                double period = 400e-9)
{
  return facing(half_space(period, "vacuum", m1), half_space(period, "vacuum", m2));
}

// Doped-silicon strips (period 400 nm, depth 1070 nm, filling 0.478) on a
// doped-silicon substrate, facing a gold half-space.
constexpr double sample_b_period = 400e-9;
constexpr double sample_b_depth = 1070e-9;
constexpr double sample_b_filling = 0.478;
constexpr double sample_b_radius = 50e-6;

inline CasimirSetup sample_b()
{
  return facing(strip_grating(sample_b_period, sample_b_filling, sample_b_depth, "vacuum",
                              "silicon_pdoped"),
                half_space(sample_b_period, "vacuum", "gold_drude"));
}

} // namespace modcas::testing
