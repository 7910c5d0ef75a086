#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace heatplan::cli {

// Entry point shared by the executable and tests. args excludes the program name.
// Returns 0 on success, 1 on runtime failure, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

}  // namespace heatplan::cli
