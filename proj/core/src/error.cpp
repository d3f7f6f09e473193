#include "modcas/error.hpp"

namespace modcas {

std::string_view to_string(ErrorCode code)
{
  switch (code) {
  case ErrorCode::ZeroFrequencyPole: return "ZeroFrequencyPole";
  case ErrorCode::NegativeFrequency: return "NegativeFrequency";
  case ErrorCode::UnknownPreset: return "UnknownPreset";
  case ErrorCode::UnknownMaterial: return "UnknownMaterial";
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::DegenerateEigenbasis: return "DegenerateEigenbasis";
  case ErrorCode::BasisMismatch: return "BasisMismatch";
  case ErrorCode::SingularT22: return "SingularT22";
  case ErrorCode::ResonantInversion: return "ResonantInversion";
  case ErrorCode::NonConvergedFloor: return "NonConvergedFloor";
  case ErrorCode::ExtrapolationUnstable: return "ExtrapolationUnstable";
  case ErrorCode::NonConvergedTail: return "NonConvergedTail";
  case ErrorCode::SpectralRadiusExceeded: return "SpectralRadiusExceeded";
  case ErrorCode::StepTooCoarse: return "StepTooCoarse";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
  : std::runtime_error(what), code_(code)
{
}

Error Error::with_context(const std::string& ctx) const
{
  Error e(code_, ctx + ": " + what());
  e.context_ = context_.empty() ? ctx : ctx + "; " + context_;
  return e;
}

} // namespace modcas
