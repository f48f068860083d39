#pragma once

namespace assist {

// Entry point of the command-line tool; argv follows main() conventions
// (argv[0] is the program name). Returns the process exit code:
//   0  success
//   1  runtime failure (unreadable/malformed files, solver divergence)
//   2  usage error (unknown subcommand, bad flags)
// Errors print a single `error: ...` line to standard error.
int run_cli(int argc, const char* const* argv);

}  // namespace assist
