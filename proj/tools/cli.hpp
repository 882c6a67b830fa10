#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pcomp::cli {

/// Runs the pcomp command line; args[0] is the program name. Returns the
/// process exit status (0 iff no error diagnostics were written to `err`).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcomp::cli
