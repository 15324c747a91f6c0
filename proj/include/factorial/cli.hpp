#pragma once

#include <iosfwd>

namespace factorial::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kValidation = 2,
  kResourceLimit = 3,
};

// Entry point for the `factorial` command line tool. Commands: analyze,
// sensitivity, simulate, gen-cases.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace factorial::cli
