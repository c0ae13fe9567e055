#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aperture {

// Entry point of the `aperture` binary. Takes argv without the program
// name, runs one command (run / analyze / sweep / scenario / render),
// prints results to `out` and diagnostics to `err`. Returns the process
// exit code: 0 success, 2 parse or validation failure, 1 runtime failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace aperture
