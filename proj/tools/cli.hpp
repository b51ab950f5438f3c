#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wsoleval::cli {

enum ExitCode { kOk = 0, kValidationError = 1, kIoError = 2 };

/// Runs one `wsoleval` invocation; `args` excludes the program name. A JSON
/// summary goes to `out`, human-readable diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wsoleval::cli
