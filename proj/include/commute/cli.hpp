#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace commute::cli {

/// Run one subcommand. Returns 0 on success, 1 on data/validation
/// errors, 2 on usage errors. All numeric output is deterministic given
/// the arguments, the input bytes and the seed.
/// Environment: COMMUTE_INPUT overrides the default input path when
/// --input is not given (default "builtin").
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace commute::cli
