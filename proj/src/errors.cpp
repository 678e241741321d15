#include "rpreg/errors.hpp"

namespace rpreg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::NegativeArgument: return "NegativeArgument";
    case ErrorCode::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorCode::ZeroComponent: return "ZeroComponent";
    case ErrorCode::InvalidPenalty: return "InvalidPenalty";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::AlphaZero: return "AlphaZero";
    case ErrorCode::SingularJ: return "SingularJ";
    case ErrorCode::PTooSmall: return "PTooSmall";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::ptrdiff_t index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      index_(index) {}

}  // namespace rpreg
