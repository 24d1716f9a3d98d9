#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace letomo {

/// Runs one subcommand (synth, invert, cv, compare, relocate, export).
/// `args` excludes the program name. Failures print an error JSON to `err`
/// and return nonzero.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace letomo
