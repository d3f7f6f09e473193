#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "modcas/free_energy.hpp"
#include "modcas/geometry.hpp"
#include "modcas/materials.hpp"

namespace modcas::cli {

inline constexpr int kSchemaVersion = 1;

struct SeparationGrid {
  // Either an explicit list or a logarithmic grid from min to max.
  std::vector<double> explicit_values;
  double min = 100e-9;
  double max = 2e-6;
  int count = 30;

  std::vector<double> points() const;
};

struct OutputSpec {
  std::string directory = "modcas_out";
  std::string force_curve = "force_curve.csv";
  std::string diagnostics = "diagnostics.csv";
  std::string manifest = "manifest.json";
  std::string error_report = "error.json";
  bool dump_spectra = false;
  bool dump_reflection = false;
};

struct PfaSpec {
  double sphere_radius = 50e-6;
  bool baseline = false;
};

// Both stacks are written from the gap outward; `left` faces the gap from
// below and `right` from above.
struct JobConfig {
  int schema = kSchemaVersion;
  MaterialTable materials = MaterialTable::with_presets();
  std::vector<std::string> inline_materials;
  std::string gap = "vacuum";
  LayerStack left;
  LayerStack right;
  SeparationGrid separations;
  FreeEnergyOptions numerics;
  bool strict_tail = false;
  OutputSpec output;
  PfaSpec pfa;
  // Dotted names of every field that was not given and took its default.
  std::vector<std::string> defaults_applied;
};

// Parses and validates a TOML job description. Throws ParseError (syntax or
// wrong type, with line and field) or ValidationError (every violated
// invariant listed).
JobConfig parse_config(std::string_view text, std::string_view source = "config");
JobConfig load_config(const std::string& path);

// Re-validates after command-line overrides.
void validate(const JobConfig& cfg);

// Full echo of the configuration, defaults included.
nlohmann::json to_json(const JobConfig& cfg);
nlohmann::json to_json(const Material& m);

const char* to_string(ZeroFrequencyMode mode);
const char* to_string(BZScheme scheme);
ZeroFrequencyMode parse_zero_frequency_mode(std::string_view s);

} // namespace modcas::cli
