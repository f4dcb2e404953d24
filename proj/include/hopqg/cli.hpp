#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hopqg {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitDivergence = 3 };

// Runs one subcommand (args excludes the program name). Diagnostics go to
// err as a single line per failure; human-readable summaries go to out.
// The quiz subcommand reads choices from in.
int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args);

}  // namespace hopqg
