#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace humble {

/// Entry point behind the `humble` executable. `args` excludes the program
/// name. Subcommands:
///   run --config FILE [--seed N] [--out DIR]
///   reproduce --figure 1..8 --out DIR [--seed N]
///   sweep --config FILE --param cost_ratio --values v1,v2,... --out DIR
/// Returns 0 on success; on failure prints a diagnostic to `err` and returns nonzero.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace humble
