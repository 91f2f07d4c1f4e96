#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cogeffort::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "COGEFFORT_OUT";

/// Runs the command line in-process. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cogeffort::cli
