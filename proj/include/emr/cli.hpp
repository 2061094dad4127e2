#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emr::cli {

enum ExitCode : int { kOk = 0, kPartial = 1, kUsage = 2, kFormat = 3, kIo = 4 };

/// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emr::cli
