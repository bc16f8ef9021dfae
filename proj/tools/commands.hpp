#pragma once

#include <string>
#include <vector>

namespace loggpis::cli {

/// Runs one command line (argv without the program name). Returns the exit
/// code: 0 on success, 1 on module errors, 2 on usage errors.
int Run(const std::vector<std::string> &args);

}  // namespace loggpis::cli
