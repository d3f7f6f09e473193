#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace modcas {

struct ConstantTerm {
  double eps;
};

// ε(iξ) = 1 + Ω²/(ξ(ξ+Γ)); carries a pole at ξ = 0.
struct DrudeTerm {
  double plasma;  // Ω_pl, rad/s
  double damping; // Γ, rad/s
};

// ε(iξ) = ε∞ + (ε0 − ε∞) ω0²/(ξ² + ω0²)
struct LorentzTerm {
  double eps_static;
  double eps_inf;
  double resonance; // ω0, rad/s
};

// Permittivity on the imaginary axis. A model with several terms is the
// composite ε = 1 + Σ(ε_i − 1); a single term is the bare model.
class DielectricModel {
public:
  using Term = std::variant<ConstantTerm, DrudeTerm, LorentzTerm>;

  DielectricModel() : DielectricModel(constant(1.0)) {}

  static DielectricModel constant(double eps);
  static DielectricModel drude(double plasma, double damping);
  static DielectricModel lorentz(double eps_static, double eps_inf, double resonance);
  static DielectricModel composite(std::span<const DielectricModel> parts);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  bool has_zero_frequency_pole() const noexcept;

private:
  explicit DielectricModel(std::vector<Term> terms) : terms_(std::move(terms)) {}
  std::vector<Term> terms_;
};

double permittivity_at(const DielectricModel& model, double xi);

// Sum of Ω²/Γ over the Drude terms (Gaussian units, rad/s).
double dc_conductivity(const DielectricModel& model);

// ξ → 0 limit of the non-conducting part: constant and Lorentz terms only.
double static_permittivity(const DielectricModel& model);

struct MagneticModel {
  double mu = 1.0;
};

double permeability_at(const MagneticModel& model, double xi);

struct Material {
  DielectricModel permittivity;
  MagneticModel permeability;
  std::string label;
};

Material preset(std::string_view name);
std::vector<std::string> preset_names();

// Label -> material lookup shared by the stack descriptions of one job.
class MaterialTable {
public:
  MaterialTable() = default;

  // Replaces an existing entry with the same label.
  void add(Material m);
  void add_preset(std::string_view name) { add(preset(name)); }
  bool contains(std::string_view label) const;
  const Material& at(std::string_view label) const;
  std::vector<std::string> labels() const;

  static MaterialTable with_presets();

private:
  std::map<std::string, Material, std::less<>> entries_;
};

} // namespace modcas
