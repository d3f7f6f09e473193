#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "modcas/geometry.hpp"

namespace modcas {

// h = max(0.5 nm, a/200)
double derivative_step(double a);

// Every separation force_and_gradient will ask for: a, a ± h, a ± h/2 for
// each centre, ascending and without duplicates.
std::vector<double> stencil_separations(std::span<const double> centres);

struct ForcePoint {
  double a = 0.0;
  double energy = 0.0;         // F, J/m²
  double pressure = 0.0;       // −dF/da, N/m²
  double curvature = 0.0;      // d²F/da², N/m³
  double pressure_error = 0.0; // |h vs h/2| relative
  double curvature_error = 0.0;
};

using EnergyFunction = std::function<double(double a)>;

// Central differences with step h; the same stencil at h/2 gives the error
// estimate. Throws StepTooCoarse when either estimate exceeds `tolerance`.
std::vector<ForcePoint> force_and_gradient(std::span<const double> centres,
                                           const EnergyFunction& energy,
                                           double tolerance = 0.01);

// Same on a sampled curve that contains the stencil separations.
std::vector<ForcePoint> force_and_gradient(std::span<const double> centres,
                                           std::span<const double> a,
                                           std::span<const double> F,
                                           double tolerance = 0.01);

// Sphere of radius R above the surface, proximity-force approximation:
// force = 2πR F, gradient = 2πR · pressure.
double pfa_force(double R, double energy);
double pfa_gradient(double R, double pressure);
// Empty when R/a ≥ 100, otherwise a warning message.
std::string pfa_validity_warning(double R, double a);

// Fraction of the first layer below the gap occupied by non-gap material;
// 1 for a homogeneous stack facing the gap with a solid medium.
double filling_factor(const LayerStack& stack, const std::string& gap);

// Material facing the gap: first non-gap material of the first layer (or of
// the exit half-space when there are no layers).
std::string facing_material(const LayerStack& stack, const std::string& gap);

} // namespace modcas
