#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hcmm::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2 };

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hcmm::cli
