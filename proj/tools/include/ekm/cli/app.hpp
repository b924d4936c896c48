#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace ekm::cli {

/// Runs one `ekm` invocation. `args` excludes the program name. Returns 0 on
/// success, 1 when a library error was reported and 2 on a usage error.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ekm::cli
