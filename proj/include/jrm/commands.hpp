#pragma once

// Command-line front end: subcommand dispatch, config/flag/env precedence,
// artifact and manifest emission, and exit-code mapping
//   0  success (>= 99% of sweep cells succeeded)
//   2  configuration error (bad flags, malformed config, out-of-range values)
//   3  numerical failure (solver, pole, instability, postselection, ...)

namespace jrm {

int run_cli(int argc, char** argv);

}  // namespace jrm
