#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace varkde {

enum class ErrorCode {
  // input and data
  UnreadableFile,
  MalformedInput,
  NoValidRows,
  NonPositivePrice,
  ConstantSeries,
  SeriesTooShort,
  EmptyInput,
  LengthMismatch,
  DimensionMismatch,
  NonFinite,
  // argument and configuration
  InvalidArgument,
  AlphaOutOfRange,
  BadDistParams,
  Config,
  // numerical
  DegenerateSample,
  NonFiniteRecursion,
  OptimFailed,
  NotConverged,
  NotFitted,
  DegenerateModel,
  AllPointsFailed,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Broad class of an error, used by front ends to choose an exit status.
enum class ErrorCategory { Usage, Data, Numerical };

ErrorCategory category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace varkde
