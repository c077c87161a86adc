#pragma once

#include <ostream>

namespace shapetest {

// Entry point of the `shapetest` command. Machine-readable output goes to
// `out`, diagnostics to `err`. Returns 0 on success, 1 on domain or I/O
// errors, 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shapetest
