#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bitalloc {

enum class ErrorCode {
  kDimensionMismatch,
  kInvalidArgument,
  kNotPositiveDefinite,
  kBitOverflow,
  kInfeasible,
  kBoundaryPoint,
  kLineSearchFailure,
  kParse,
  kIo,
  kTooLarge,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library surfaces as this exception. The
/// code is stable and meant for programmatic dispatch; the message carries
/// the human-readable context (offending index, line number, iterate, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bitalloc
