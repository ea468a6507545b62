#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qmrom::cli {

enum ExitCode : int { ok = 0, config_error = 1, diverged = 2 };

/// Entry point of the `qmrom` tool. Subcommands: run, compare, modes, list, show.
/// Returns the process exit code; nothing is thrown.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qmrom::cli
