#pragma once

#include <string>
#include <vector>

namespace mlnk {

// Full command-line entry point. Returns the process exit code:
//   0 run completed and all requested checks passed
//   2 invalid input (config, arguments, parameter ranges)
//   3 capability or numerical-certification failure (resolution, stall,
//     coverage, inapplicable criterion, failed checks)
//   4 internal inconsistency
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

} // namespace mlnk
