#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace treejac {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on usage or validation errors, 2 on numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace treejac
