#pragma once

#include <iosfwd>

namespace rankneat {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitDataError = 2,
    kExitTrainingError = 3,
    kExitConfigError = 4,
};

/// Entry point of the `rankneat` tool. Subcommands: gen-synth, build-pairs,
/// train, compare, report.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rankneat
