#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace featgate {

// Every failure the library can raise. Grouped by the exit category the CLI
// maps them to (config = 2, data = 3, io = 4).
enum class ErrorCode {
  // data
  MissingColumn,
  UnparsableDate,
  UnparsableNumber,
  DuplicateDate,
  NonPositivePrice,
  TooShort,
  EmptyIntersection,
  AllGapColumn,
  OutOfRange,
  InsufficientHistory,
  InvalidFunctionCode,
  TooManyFeatures,
  UnknownSeries,
  TooFewRows,
  NonFiniteInput,
  DegenerateTarget,
  ShapeMismatch,
  InvalidRates,
  LengthMismatch,
  ConstantTruth,
  EmptySample,
  OutOfRangeGene,
  UnbalancedArms,
  BadModel,
  // config
  InvalidConfig,
  InvalidArgument,
  // io
  IoError,
};

enum class ErrorCategory { Config, Data, Io };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace featgate
