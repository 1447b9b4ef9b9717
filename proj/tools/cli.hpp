#pragma once

namespace mtc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitPlugin = 3;

/// Runs one `mtc` command line and returns its exit code.
int dispatch(int argc, char** argv);

} // namespace mtc::cli
