#pragma once

// Command-line surface. run_cli is the whole program (main is a thin
// wrapper); the acceptance tests drive the same entry point in-process.
//
// Exit codes: 0 success, 2 config error, 3 numerical non-convergence,
// 4 precondition violation.

#include <string>
#include <vector>

namespace epcirc {

extern const char* const kVersion;

int run_cli(const std::vector<std::string>& args);

}  // namespace epcirc
