#include "modcas/lifshitz.hpp"

#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "modcas/constants.hpp"
#include "modcas/error.hpp"

namespace modcas {

namespace {

double static_response(const Material& m)
{
  return static_permittivity(m.permittivity);
}

} // namespace

FresnelPair fresnel(const Material& medium, const Material& gap, double xi, double k)
{
  if (xi < 0.0)
    throw Error(ErrorCode::NegativeFrequency, "negative imaginary frequency");
  const double mu1 = permeability_at(medium.permeability, xi);
  const double mug = permeability_at(gap.permeability, xi);
  if (xi == 0.0) {
    if (gap.permittivity.has_zero_frequency_pole())
      throw Error(ErrorCode::ValidationError, "conducting gap medium");
    const double rs = (mu1 - mug) / (mu1 + mug);
    if (medium.permittivity.has_zero_frequency_pole())
      return {rs, 1.0};
    const double e1 = static_response(medium), eg = static_response(gap);
    return {rs, (e1 - eg) / (e1 + eg)};
  }
  const double e1 = permittivity_at(medium.permittivity, xi);
  const double eg = permittivity_at(gap.permittivity, xi);
  const double k0 = xi / constants::c;
  const double kg = std::sqrt(eg * mug * k0 * k0 + k * k);
  const double k1 = std::sqrt(e1 * mu1 * k0 * k0 + k * k);
  return {(mu1 * kg - mug * k1) / (mu1 * kg + mug * k1),
          (e1 * kg - eg * k1) / (e1 * kg + eg * k1)};
}

LifshitzResult lifshitz_terms(const Material& m1, const Material& m2, const Material& gap,
                              double a, const MatsubaraGrid& grid, int derivative)
{
  validate(grid);
  if (!(a > 0.0))
    throw Error(ErrorCode::ValidationError, "separation must be positive");
  if (derivative < 0 || derivative > 2)
    throw Error(ErrorCode::ValidationError, "derivative order must be 0, 1 or 2");

  boost::math::quadrature::exp_sinh<double> integrator;
  const double pref = grid.thermal_energy() / (2.0 * constants::pi);
  LifshitzResult out;
  out.per_l.resize(static_cast<std::size_t>(grid.terms));

  for (int l = 0; l < grid.terms; ++l) {
    const double xi = grid.frequency(l);
    const double eg = xi > 0.0 ? permittivity_at(gap.permittivity, xi) : 1.0;
    const double mug = permeability_at(gap.permeability, xi);
    const double kmin = std::sqrt(eg * mug) * xi / constants::c;
    const double damp = std::exp(-2.0 * kmin * a);

    // k dk = κ dκ, κ = κmin + u/(2a)
    auto integrand = [&](double u) {
      const double kappa = kmin + u / (2.0 * a);
      if (kappa == 0.0)
        return 0.0; // κ log κ → 0 for perfectly reflecting static TM
      const double e = damp * std::exp(-u);
      if (e == 0.0 || !std::isfinite(kappa))
        return 0.0;
      const double k = std::sqrt(std::max(0.0, (kappa - kmin) * (kappa + kmin)));
      const auto r1 = fresnel(m1, gap, xi, k);
      const auto r2 = fresnel(m2, gap, xi, k);
      double s = 0.0;
      for (double x : {r1.rs * r2.rs, r1.rp * r2.rp}) {
        const double y = x * e;
        // 1 - y without cancellation when x·damp is close to one
        const double omy = (1.0 - x * damp) - x * damp * std::expm1(-u);
        if (derivative == 0)
          s += y < 0.5 ? std::log1p(-y) : std::log(omy);
        else if (derivative == 1)
          s += 2.0 * y * (kappa / omy);
        else
          s += -4.0 * y * (kappa / omy) * (kappa / omy); // ratio first: both underflow near u = 0
      }
      return kappa * s / (2.0 * a);
    };
    const double I = integrator.integrate(integrand, 1e-12);
    out.per_l[static_cast<std::size_t>(l)] = pref * grid.weight(l) * I;
  }
  // smallest terms first
  double sum = 0.0;
  for (auto it = out.per_l.rbegin(); it != out.per_l.rend(); ++it)
    sum += *it;
  out.value = sum;
  return out;
}

} // namespace modcas
