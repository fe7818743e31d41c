#pragma once

namespace ranumopt {

// Command-line front end. Exit codes: 0 success, 1 usage or internal error,
// 2 solver/generator failure (no convergence, no usable instance),
// 3 invalid input file.
int run_cli(int argc, const char* const* argv);

}  // namespace ranumopt
