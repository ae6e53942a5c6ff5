#include "featgate/error.hpp"

namespace featgate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparsableDate: return "UnparsableDate";
    case ErrorCode::UnparsableNumber: return "UnparsableNumber";
    case ErrorCode::DuplicateDate: return "DuplicateDate";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::AllGapColumn: return "AllGapColumn";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::InvalidFunctionCode: return "InvalidFunctionCode";
    case ErrorCode::TooManyFeatures: return "TooManyFeatures";
    case ErrorCode::UnknownSeries: return "UnknownSeries";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidRates: return "InvalidRates";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConstantTruth: return "ConstantTruth";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::OutOfRangeGene: return "OutOfRangeGene";
    case ErrorCode::UnbalancedArms: return "UnbalancedArms";
    case ErrorCode::BadModel: return "BadModel";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidArgument:
      return ErrorCategory::Config;
    case ErrorCode::IoError:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace featgate
