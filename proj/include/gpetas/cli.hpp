#pragma once

namespace gpetas {

// Parses argv and dispatches to one of the subcommands
// (simulate | fit-gp | fit-mle | evaluate).  Returns the process exit code:
// 0 success, 2 configuration/input error, 3 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace gpetas
