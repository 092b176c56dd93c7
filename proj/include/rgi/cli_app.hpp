#pragma once

#include <string>
#include <vector>

namespace rgi {

// Runs one CLI invocation (args exclude the program name) and returns the
// process exit code. All errors surface as nonzero codes with a message on
// stderr; no command mutates its input dataset files.
int run_cli(const std::vector<std::string>& args);

}  // namespace rgi
