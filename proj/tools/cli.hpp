#pragma once

#include <string>
#include <vector>

namespace sbniva::cli {

// Runs one pipeline subcommand. args excludes the program name.
// Exit codes: 0 success, 2 bad usage / invalid input or config, 1 stage error.
int run(std::vector<std::string> args);

}  // namespace sbniva::cli
