#include "modcas/force.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "modcas/constants.hpp"
#include "modcas/error.hpp"

namespace modcas {

double derivative_step(double a)
{
  return std::max(0.5e-9, a / 200.0);
}

std::vector<double> stencil_separations(std::span<const double> centres)
{
  std::vector<double> out;
  for (double a : centres) {
    const double h = derivative_step(a);
    if (!(a - h > 0.0))
      throw Error(ErrorCode::ValidationError, "separation too small for the derivative stencil");
    for (double x : {a - h, a - h / 2, a, a + h / 2, a + h})
      out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

double relative_change(double coarse, double fine)
{
  const double d = std::abs(coarse - fine);
  if (d == 0.0)
    return 0.0;
  return d / std::max(std::abs(coarse), std::abs(fine));
}

} // namespace

std::vector<ForcePoint> force_and_gradient(std::span<const double> centres,
                                           const EnergyFunction& energy, double tolerance)
{
  std::vector<ForcePoint> out;
  out.reserve(centres.size());
  for (double a : centres) {
    const double h = derivative_step(a);
    if (!(a - h > 0.0))
      throw Error(ErrorCode::ValidationError, "separation too small for the derivative stencil");
    const double f0 = energy(a);
    const double fm = energy(a - h), fp = energy(a + h);
    const double gm = energy(a - h / 2), gp = energy(a + h / 2);

    ForcePoint p;
    p.a = a;
    p.energy = f0;
    p.pressure = -(fp - fm) / (2 * h);
    p.curvature = (fp - 2 * f0 + fm) / (h * h);
    const double pressure_half = -(gp - gm) / h;
    const double curvature_half = (gp - 2 * f0 + gm) / (h * h / 4);
    p.pressure_error = relative_change(p.pressure, pressure_half);
    p.curvature_error = relative_change(p.curvature, curvature_half);
    if (p.pressure_error > tolerance || p.curvature_error > tolerance) {
      std::ostringstream os;
      os << "step halving changes the derivatives at a = " << a << " m by "
         << std::max(p.pressure_error, p.curvature_error);
      throw Error(ErrorCode::StepTooCoarse, os.str());
    }
    out.push_back(p);
  }
  return out;
}

std::vector<ForcePoint> force_and_gradient(std::span<const double> centres,
                                           std::span<const double> a,
                                           std::span<const double> F, double tolerance)
{
  if (a.size() != F.size())
    throw Error(ErrorCode::DimensionMismatch, "separation and energy samples differ in length");
  auto lookup = [&](double x) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - x) <= 1e-12 * x)
        return F[i];
    std::ostringstream os;
    os << "energy curve has no sample at a = " << x << " m";
    throw Error(ErrorCode::DimensionMismatch, os.str());
  };
  return force_and_gradient(centres, EnergyFunction(lookup), tolerance);
}

double pfa_force(double R, double energy)
{
  return 2.0 * constants::pi * R * energy;
}

double pfa_gradient(double R, double pressure)
{
  return 2.0 * constants::pi * R * pressure;
}

std::string pfa_validity_warning(double R, double a)
{
  if (R / a >= 100.0)
    return {};
  std::ostringstream os;
  os << "R/a = " << R / a << " < 100 at a = " << a << " m; proximity approximation is rough";
  return os.str();
}

double filling_factor(const LayerStack& stack, const std::string& gap)
{
  if (stack.layers.empty())
    return stack.exit == gap ? 0.0 : 1.0;
  const auto& layer = stack.layers.front();
  const double area = stack.cell.Lx * stack.cell.Ly;
  double gap_area = 0.0, solid_area = 0.0;
  for (const auto& q : layer.inclusions)
    (q.material == gap ? gap_area : solid_area) += q.wx * q.wy;
  if (layer.background == gap)
    return solid_area / area;
  return 1.0 - gap_area / area;
}

std::string facing_material(const LayerStack& stack, const std::string& gap)
{
  if (!stack.layers.empty()) {
    const auto& layer = stack.layers.front();
    if (layer.background != gap)
      return layer.background;
    for (const auto& q : layer.inclusions)
      if (q.material != gap)
        return q.material;
  }
  return stack.exit;
}

} // namespace modcas
