#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tightfb::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDomain = 2, kIo = 3 };

// Runs one subcommand; payload goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tightfb::cli
