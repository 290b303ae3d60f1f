#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nutrans::cli {

/// Runs the command line; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker threads from NUTRANS_WORKERS (default 1).
int worker_count();

} // namespace nutrans::cli
