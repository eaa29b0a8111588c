#pragma once

namespace reachkit {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNotConverged = 3,
  kExitInfeasible = 4,
  kExitMismatch = 5,
};

// Entry point of the `reachkit` tool: brt, demos, icl, eval, transfer.
int run_cli(int argc, char** argv);

}  // namespace reachkit
