#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace modcas {

enum class ErrorCode {
  ZeroFrequencyPole,
  NegativeFrequency,
  UnknownPreset,
  UnknownMaterial,
  DimensionMismatch,
  DegenerateEigenbasis,
  BasisMismatch,
  SingularT22,
  ResonantInversion,
  NonConvergedFloor,
  ExtrapolationUnstable,
  NonConvergedTail,
  SpectralRadiusExceeded,
  StepTooCoarse,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// front end can emit a machine-readable report.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }
  // Free-form location prefix added while the exception unwinds through the
  // sweep (Matsubara index, node, layer).
  const std::string& context() const noexcept { return context_; }
  Error with_context(const std::string& ctx) const;

private:
  ErrorCode code_;
  std::string context_;
};

} // namespace modcas
