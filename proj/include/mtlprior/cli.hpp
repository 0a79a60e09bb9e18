#pragma once

#include <iosfwd>

namespace mtlprior {

/// Entry point of the `mtlprior` command-line tool. Subcommands: solve,
/// compare, gen, split, prior, eval. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mtlprior
