#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gna::cli {

/// Runs the `gna` command line. `args` excludes the program name. Returns the
/// process exit status; diagnostics go to `err` as a single line.
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// The fast invariant checks behind `gna selftest`. Writes one line per check
/// and returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace gna::cli
