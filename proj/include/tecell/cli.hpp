#pragma once

#include <iosfwd>

namespace tecell {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitSolver = 2,
    kExitConfig = 3,
};

/// Entry point of the command-line tool: subcommands run, validate, mms,
/// sweep-tau, oracle-compare, each taking --config <path>.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tecell
