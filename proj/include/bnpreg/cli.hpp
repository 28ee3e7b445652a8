#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bnpreg {

/// Command-line entry point; `args` excludes the program name. Returns 0 on
/// success, 2 on usage or configuration errors, 1 on runtime failures.
int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bnpreg
