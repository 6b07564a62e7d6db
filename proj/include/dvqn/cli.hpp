#pragma once

namespace dvqn {

// Entry point behind the `dvqn` binary. Returns the process exit code:
// 0 success, 2 config/usage error, 3 numerical failure, 1 anything else.
int run_cli(int argc, const char* const* argv);

}  // namespace dvqn
