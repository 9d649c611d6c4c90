#include "mmboot/errors.hpp"

namespace mmboot {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::moment_infeasible: return "MomentInfeasible";
    case ErrorCode::kurtosis_not_heavy: return "KurtosisNotHeavy";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::empty_cluster: return "EmptyCluster";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::non_positive_scale: return "NonPositiveScale";
    case ErrorCode::non_finite_value: return "NonFiniteValue";
    case ErrorCode::insufficient_degrees_of_freedom: return "InsufficientDegreesOfFreedom";
    case ErrorCode::singular_block: return "SingularBlock";
    case ErrorCode::rank_deficient: return "RankDeficient";
    case ErrorCode::non_positive_k: return "NonPositiveK";
    case ErrorCode::singular_weight: return "SingularWeight";
    case ErrorCode::too_many_failures: return "TooManyFailures";
    case ErrorCode::division_guard: return "DivisionGuard";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::moment_infeasible:
    case ErrorCode::kurtosis_not_heavy:
      return ErrorCategory::validation;
    case ErrorCode::parse_error:
    case ErrorCode::empty_cluster:
    case ErrorCode::dimension_mismatch:
    case ErrorCode::non_positive_scale:
    case ErrorCode::non_finite_value:
    case ErrorCode::insufficient_degrees_of_freedom:
      return ErrorCategory::data;
    default:
      return ErrorCategory::numerical;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace mmboot
