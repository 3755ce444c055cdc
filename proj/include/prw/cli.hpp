#pragma once

#include <iosfwd>

namespace prw {

// Runs the command line tool. CSV rows go to `out` behind a '#'-prefixed
// manifest; diagnostics and timing go to `err`. Returns the process exit
// code: 0 success, 1 usage error, 2 model-condition (applicability) error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace prw
