#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hhcert::cli {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kSuccess = 0,
  kViolation = 1,
  kUsage = 2,
  kNumerical = 3,
};

/// Runs the tool on `args` (without the program name). Reports go to `out`
/// unless --output names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace hhcert::cli
