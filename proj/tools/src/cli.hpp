#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dta/error.hpp"

namespace dta::cli {

/// Process exit status per failure category. 2 is reserved for usage errors.
int exit_code(ErrorKind kind) noexcept;
inline constexpr int usage_exit_code = 2;
inline constexpr int internal_exit_code = 1;

/// Parses `args` (without the program name) and runs one subcommand. Reports
/// go to `out`; progress and the single-line diagnostic
/// "dta: error[<kind>]: <message>" go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dta::cli
