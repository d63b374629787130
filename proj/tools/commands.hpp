#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace terrasense::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitNegative = 1,  ///< analysis completed with a negative verdict
  kExitUsage = 2      ///< bad arguments or configuration
};

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace terrasense::cli
