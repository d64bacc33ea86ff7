#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace w3sim {

/// Command-line entry point. `args` excludes the program name.
/// Returns 0 on success, 1 on a reference mismatch or failed check, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace w3sim
