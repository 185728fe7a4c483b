#pragma once

namespace asyncpr::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 1;
inline constexpr int exit_not_converged = 2;

/// Entry point shared by the executable and in-process callers.
///   run   --config <path> --out <dir> [--traces] [--seed-override N]
///   table --in <dir> --out <file.csv>
/// Log verbosity comes from ASYNCPR_LOG (trace, debug, info, warn, error, off).
int run_cli(int argc, const char* const* argv);

}  // namespace asyncpr::cli
