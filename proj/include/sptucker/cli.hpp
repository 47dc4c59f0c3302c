#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sptucker {

// Runs one CLI invocation; args excludes the program name. Returns 0 on
// success, 1 on usage or data errors, 2 on I/O errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sptucker
