#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semdist::cli {

// Exit codes: 0 success, 1 validation/library error (JSON object with
// error_kind and detail on `err`), 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

// Runs the tool on `args` (program name excluded).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semdist::cli
