#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace themis::cli {

/// Exit codes: 0 success, 1 user or validation error, 2 internal error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace themis::cli
