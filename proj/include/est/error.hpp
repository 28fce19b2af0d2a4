#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace est {

enum class ErrorCode {
  DimensionMismatch,
  NonPositiveTotalMass,
  WeightSumOutOfTolerance,
  IndexOutOfRange,
  NonUnitDirection,
  MassImbalance,
  ClassMismatch,
  InstanceTooLarge,
  InvalidT,
  InvalidCoupling,
  InvalidArgument,
  ParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveTotalMass: return "NonPositiveTotalMass";
    case ErrorCode::WeightSumOutOfTolerance: return "WeightSumOutOfTolerance";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonUnitDirection: return "NonUnitDirection";
    case ErrorCode::MassImbalance: return "MassImbalance";
    case ErrorCode::ClassMismatch: return "ClassMismatch";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::InvalidT: return "InvalidT";
    case ErrorCode::InvalidCoupling: return "InvalidCoupling";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Single exception type for the library; inspect code() to branch on the cause.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace est
