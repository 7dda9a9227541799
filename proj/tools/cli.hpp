#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nijkit::cli {

enum ExitCode : int {
  kPass = 0,
  kChecksFailed = 1,
  kUsageError = 2,
  kNumericalFailure = 3,
};

/// Runs one command line (without the program name). The report goes to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nijkit::cli
