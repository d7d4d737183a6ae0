#include "varkde/error.hpp"

namespace varkde {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::NoValidRows: return "NoValidRows";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::BadDistParams: return "BadDistParams";
    case ErrorCode::Config: return "Config";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::NonFiniteRecursion: return "NonFiniteRecursion";
    case ErrorCode::OptimFailed: return "OptimFailed";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NotFitted: return "NotFitted";
    case ErrorCode::DegenerateModel: return "DegenerateModel";
    case ErrorCode::AllPointsFailed: return "AllPointsFailed";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::AlphaOutOfRange:
    case ErrorCode::BadDistParams:
    case ErrorCode::Config:
      return ErrorCategory::Usage;
    case ErrorCode::UnreadableFile:
    case ErrorCode::MalformedInput:
    case ErrorCode::NoValidRows:
    case ErrorCode::NonPositivePrice:
    case ErrorCode::ConstantSeries:
    case ErrorCode::SeriesTooShort:
    case ErrorCode::EmptyInput:
    case ErrorCode::LengthMismatch:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonFinite:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Numerical;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

}  // namespace varkde
