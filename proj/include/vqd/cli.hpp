#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vqd {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitData = 3,
    kExitBackend = 4,
};

/// Entry point of the `vqd` tool; `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vqd
