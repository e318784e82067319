#pragma once

#include <iosfwd>

namespace sire::cli {

/// Runs one subcommand (validate, forecast, evaluate, explain, synth). Artifacts go to --output or
/// `out`; diagnostics and summary tables go to `err`. Returns the process exit status.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace sire::cli
