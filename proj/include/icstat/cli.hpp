#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace icstat::cli {

// Entry point behind the `icstat` binary. Returns 0 on success, 2 on usage
// errors, 1 on data or numeric errors. The machine-readable report goes to
// `out`; warnings and diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace icstat::cli
