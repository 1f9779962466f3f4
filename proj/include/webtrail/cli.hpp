#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace webtrail {

// Entry point of the `webtrail` tool. Subcommands: explore, refine, export,
// report, merge. Returns the process exit status; Error codes map through
// exit_code(), usage errors return 2.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace webtrail
