#include "modcas/materials.hpp"

#include <cmath>

#include "modcas/error.hpp"

namespace modcas {

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* what)
{
  if (!std::isfinite(v))
    throw Error(ErrorCode::ValidationError, std::string(what) + " must be finite");
}

} // namespace

DielectricModel DielectricModel::constant(double eps)
{
  require_finite(eps, "constant permittivity");
  if (eps <= 0.0)
    throw Error(ErrorCode::ValidationError, "constant permittivity must be positive");
  return DielectricModel({ConstantTerm{eps}});
}

DielectricModel DielectricModel::drude(double plasma, double damping)
{
  require_finite(plasma, "plasma frequency");
  require_finite(damping, "damping");
  if (plasma < 0.0 || damping <= 0.0)
    throw Error(ErrorCode::ValidationError, "Drude term needs plasma >= 0 and damping > 0");
  return DielectricModel({DrudeTerm{plasma, damping}});
}

DielectricModel DielectricModel::lorentz(double eps_static, double eps_inf, double resonance)
{
  require_finite(eps_static, "static permittivity");
  require_finite(eps_inf, "high-frequency permittivity");
  require_finite(resonance, "resonance frequency");
  if (resonance <= 0.0)
    throw Error(ErrorCode::ValidationError, "Lorentz resonance must be positive");
  if (eps_inf <= 0.0 || eps_static < eps_inf)
    throw Error(ErrorCode::ValidationError, "Lorentz term needs eps_static >= eps_inf > 0");
  return DielectricModel({LorentzTerm{eps_static, eps_inf, resonance}});
}

DielectricModel DielectricModel::composite(std::span<const DielectricModel> parts)
{
  std::vector<Term> all;
  for (const auto& p : parts)
    all.insert(all.end(), p.terms_.begin(), p.terms_.end());
  if (all.empty())
    all.emplace_back(ConstantTerm{1.0});
  return DielectricModel(std::move(all));
}

bool DielectricModel::has_zero_frequency_pole() const noexcept
{
  for (const auto& t : terms_)
    if (std::holds_alternative<DrudeTerm>(t))
      return true;
  return false;
}

double permittivity_at(const DielectricModel& model, double xi)
{
  if (xi < 0.0 || std::isnan(xi))
    throw Error(ErrorCode::NegativeFrequency, "imaginary frequency must be non-negative");
  if (xi == 0.0 && model.has_zero_frequency_pole())
    throw Error(ErrorCode::ZeroFrequencyPole,
                "permittivity with a Drude term is singular at zero frequency");
  double eps = 1.0;
  for (const auto& t : model.terms()) {
    eps += std::visit(overloaded{
                        [](const ConstantTerm& c) { return c.eps - 1.0; },
                        [xi](const DrudeTerm& d) {
                          return d.plasma * d.plasma / (xi * (xi + d.damping));
                        },
                        [xi](const LorentzTerm& l) {
                          const double w2 = l.resonance * l.resonance;
                          return l.eps_inf - 1.0 + (l.eps_static - l.eps_inf) * w2 / (xi * xi + w2);
                        }},
                      t);
  }
  return eps;
}

double dc_conductivity(const DielectricModel& model)
{
  double s = 0.0;
  for (const auto& t : model.terms())
    if (const auto* d = std::get_if<DrudeTerm>(&t))
      s += d->plasma * d->plasma / d->damping;
  return s;
}

double static_permittivity(const DielectricModel& model)
{
  double eps = 1.0;
  for (const auto& t : model.terms()) {
    if (const auto* c = std::get_if<ConstantTerm>(&t))
      eps += c->eps - 1.0;
    else if (const auto* l = std::get_if<LorentzTerm>(&t))
      eps += l->eps_static - 1.0;
  }
  return eps;
}

double permeability_at(const MagneticModel& model, double xi)
{
  if (xi < 0.0 || std::isnan(xi))
    throw Error(ErrorCode::NegativeFrequency, "imaginary frequency must be non-negative");
  return model.mu;
}

Material preset(std::string_view name)
{
  const auto silicon = DielectricModel::lorentz(11.87, 1.035, 6.6e15);
  if (name == "vacuum")
    return {DielectricModel::constant(1.0), {}, "vacuum"};
  if (name == "gold_drude")
    return {DielectricModel::drude(1.27524e16, 6.59631e13), {}, "gold_drude"};
  if (name == "silicon_intrinsic")
    return {silicon, {}, "silicon_intrinsic"};
  if (name == "silicon_pdoped") {
    const DielectricModel parts[] = {silicon, DielectricModel::drude(3.6151e14, 7.868e13)};
    return {DielectricModel::composite(parts), {}, "silicon_pdoped"};
  }
  throw Error(ErrorCode::UnknownPreset, "unknown material preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names()
{
  return {"vacuum", "gold_drude", "silicon_intrinsic", "silicon_pdoped"};
}

void MaterialTable::add(Material m)
{
  if (m.label.empty())
    throw Error(ErrorCode::ValidationError, "material label must not be empty");
  if (m.permeability.mu <= 0.0 || !std::isfinite(m.permeability.mu))
    throw Error(ErrorCode::ValidationError, "permeability of '" + m.label + "' must be positive");
  auto label = m.label;
  entries_.insert_or_assign(std::move(label), std::move(m));
}

bool MaterialTable::contains(std::string_view label) const
{
  return entries_.find(label) != entries_.end();
}

const Material& MaterialTable::at(std::string_view label) const
{
  auto it = entries_.find(label);
  if (it == entries_.end())
    throw Error(ErrorCode::UnknownMaterial, "unknown material '" + std::string(label) + "'");
  return it->second;
}

std::vector<std::string> MaterialTable::labels() const
{
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    out.push_back(k);
  return out;
}

MaterialTable MaterialTable::with_presets()
{
  MaterialTable t;
  for (const auto& n : preset_names())
    t.add_preset(n);
  return t;
}

} // namespace modcas
