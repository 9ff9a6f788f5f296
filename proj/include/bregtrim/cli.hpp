#ifndef BREGTRIM_CLI_HPP
#define BREGTRIM_CLI_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bregtrim {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,     // bad flags, bad specs, domain violations
    kExitIo = 3,        // unreadable input or unwritable output
    kExitDegenerate = 4 // infinite cost or degenerate data
};

/// Runs the command line (without the program name). Output and error
/// messages go to the given streams.
int run_cli(const std::vector<std::string>& args);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Integer grid syntax: comma-separated items, each `a` or `a..b`
/// (inclusive), e.g. `1..5` or `90,100..120`. Blank text gives an empty
/// grid. Throws ConfigError.
std::vector<std::size_t> parse_grid(std::string_view text);

/// Comma-separated reals.
std::vector<double> parse_real_list(std::string_view text);

}  // namespace bregtrim

#endif  // BREGTRIM_CLI_HPP
