#pragma once

#include <iosfwd>

namespace valleyqt::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kProjected = 2,  // success, but the reconstruction needed a physicality projection
  kIoError = 3,
};

/// Entry point of the `valleyqt` tool. Subcommands: simulate, tomo,
/// uncertainty, dynamics. Diagnostics go to `err`, summaries to `out`.
/// The optional environment variable VALLEYQT_OUTPUT_DIR sets the default
/// output directory.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace valleyqt::cli
