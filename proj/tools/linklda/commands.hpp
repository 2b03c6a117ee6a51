#pragma once

namespace linklda::cli {

/// Parses the command line and runs one subcommand. Returns the process
/// exit code: 0 success, 2 usage, 3 validation or parse, 4 internal consistency.
int run(int argc, char** argv);

}  // namespace linklda::cli
