#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mmboot/errors.hpp"

namespace mmboot::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_usage = 2,
  exit_data = 3,
  exit_numerical = 4,
};

int exit_code_for(ErrorCategory category) noexcept;

/// Runs the command line `mmboot <args...>` (args excludes the program name).
/// Data goes to `out` or to files, diagnostics and progress to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmboot::cli
