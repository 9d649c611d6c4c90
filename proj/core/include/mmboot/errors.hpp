#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmboot {

enum class ErrorCode {
  // input validation
  invalid_argument,
  moment_infeasible,
  kurtosis_not_heavy,
  // data errors
  parse_error,
  empty_cluster,
  dimension_mismatch,
  non_positive_scale,
  non_finite_value,
  insufficient_degrees_of_freedom,
  // numerical failures
  singular_block,
  rank_deficient,
  non_positive_k,
  singular_weight,
  too_many_failures,
  division_guard,
};

enum class ErrorCategory { validation, data, numerical };

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return mmboot::category(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace mmboot
