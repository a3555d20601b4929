#ifndef SYNTHTS_CLI_COMMANDS_HPP
#define SYNTHTS_CLI_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace synthts::cli {

// Parses and runs one synthts_bench invocation. args excludes the program
// name. Returns the process exit code: 0 success, 1 usage error, 2 data or
// validation error, 3 internal invariant violation.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synthts::cli

#endif  // SYNTHTS_CLI_COMMANDS_HPP
