#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spd::cli {

// Runs one command line (args excludes the program name). Returns 0 on success,
// 2 on usage errors and 1 when a computation fails.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spd::cli
