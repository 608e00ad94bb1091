#pragma once

#include <iosfwd>

namespace wgqed {

// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_io = 1, exit_config = 2, exit_numerical = 3 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wgqed
