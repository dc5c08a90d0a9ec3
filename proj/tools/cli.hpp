#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gts::cli {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on validation failures, 2 on I/O, parse or schema errors. Diagnostics
/// go to `err` as one JSON object per line.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gts::cli
