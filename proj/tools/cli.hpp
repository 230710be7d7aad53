#pragma once

#include <ostream>

namespace ssf::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigInvalid = 2,
  kInconsistentProfile = 3,
  kResourceExceeded = 4,
  kInternal = 5,
};

/// Runs the command line; results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssf::cli
