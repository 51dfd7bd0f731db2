#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hoprag::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kProviderError = 3 };

/// Entry point shared by the `hoprag` binary and in-process tests. `args`
/// excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hoprag::cli
