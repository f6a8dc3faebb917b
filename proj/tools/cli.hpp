#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rotokin {

// Runs one `rotokin` command. `args` excludes the program name. Results go to
// `out`; on failure a one-line JSON error record goes to `err` and the return
// value is nonzero (1 for runtime errors, 2 for usage errors).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rotokin
