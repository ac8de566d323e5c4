#pragma once

#include <string>
#include <vector>

namespace jigsaw3d::cli {

// Runs the command line tool on `args` (args[0] is the program name).
// Returns the process exit code: 0 success, 1 runtime failure, 2 bad
// usage or configuration, 3 unreadable checkpoint.
int run(const std::vector<std::string>& args);

// The quick oracle/invariant suite behind `jigsaw3d selfcheck`. Prints one
// line per check and returns the number of failures.
int selfcheck(bool verbose);

}  // namespace jigsaw3d::cli
