#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rpreg {

enum class ErrorCode {
  ConstantColumn,
  DimensionMismatch,
  NonPositiveSigma,
  DegenerateWeights,
  NegativeArgument,
  NonPositiveArgument,
  ZeroComponent,
  InvalidPenalty,
  InvalidConfig,
  DegenerateScale,
  DomainError,
  EmptyData,
  AlphaZero,
  SingularJ,
  PTooSmall,
  InvalidScenario,
  ParseError,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure in the library is reported through this type. `index` carries
// the offending column/observation when one exists, otherwise -1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::ptrdiff_t index = -1);

  ErrorCode code() const noexcept { return code_; }
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::ptrdiff_t index_;
};

}  // namespace rpreg
