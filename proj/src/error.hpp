#pragma once

#include <stdexcept>
#include <string>

namespace bshrink {

enum class ErrorCode {
  InvalidParameter,
  NotPositiveDefinite,
  DegreesOfFreedomTooSmall,
  SingularDesign,
  DegenerateBeta,
  DegenerateColumn,
  NonFinite,
  DimensionError,
  ChainError,
  EmptyGrid,
  PatternDimensionMismatch,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Kernel failure inside a Gibbs chain, tagged with the sweep that raised it.
class ChainError : public Error {
 public:
  ChainError(ErrorCode cause, long iteration, const std::string& what)
      : Error(ErrorCode::ChainError, what), cause_(cause), iteration_(iteration) {}

  ErrorCode cause() const noexcept { return cause_; }
  long iteration() const noexcept { return iteration_; }

 private:
  ErrorCode cause_;
  long iteration_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace bshrink
