#pragma once

#include <string>
#include <vector>

namespace scenforge {

/// Entry point behind tools/scenforge; exposed here so tests can drive the
/// CLI in-process. Returns the process exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace scenforge
