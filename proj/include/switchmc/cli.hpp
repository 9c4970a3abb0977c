#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace switchmc::cli {

/// Runs one CLI invocation. Exit codes: 0 success, 1 negative verdict under
/// --strict, 2 input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace switchmc::cli
