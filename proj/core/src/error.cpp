#include "bitalloc/error.hpp"

namespace bitalloc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kNotPositiveDefinite: return "not positive definite";
    case ErrorCode::kBitOverflow: return "bit overflow";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kBoundaryPoint: return "boundary point";
    case ErrorCode::kLineSearchFailure: return "line search failure";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "io error";
    case ErrorCode::kTooLarge: return "too large";
  }
  return "unknown";
}

}  // namespace bitalloc
