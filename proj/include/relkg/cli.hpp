#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relkg {

/// Exit statuses of run_cli.
enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitUsage = 2,
    kExitParse = 3,
    kExitMapping = 4,
    kExitBelowThreshold = 5,
};

struct CliEnv {
    /// ANSI colors in human-readable output.
    bool color = false;
    /// Print the repl prompt.
    bool interactive = false;
};

/// Run one `relkg` invocation. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
            const CliEnv& env = {});

}  // namespace relkg
