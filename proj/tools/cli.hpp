#pragma once

#include <string>
#include <vector>

namespace hkg {

// Runs one CLI invocation (arguments without the program name) and returns
// the process exit code: 0 ok, 1 usage, 2 data error, 3 model error.
int dispatch(const std::vector<std::string>& args);

}  // namespace hkg
