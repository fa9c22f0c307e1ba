#pragma once

// Command-line front end shared by the crystal_drift tool and the tests.

namespace crystal::cli {

/// Parses argv, runs one subcommand and returns the process exit code:
/// 0 ok, 1 invalid configuration, 2 runtime failure, 3 a check failed.
int run(int argc, char** argv);

}  // namespace crystal::cli
