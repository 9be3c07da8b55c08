#pragma once

#include <string>
#include <vector>

namespace nexg::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInput = 2, kDivergence = 3, kBudgetExhausted = 4 };

/// Parses argv (argv[0] is the program name) and runs one subcommand.
int run(int argc, const char* const* argv);
/// `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace nexg::cli
