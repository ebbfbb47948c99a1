#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace l0path::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kInternal = 4 };

// Runs one command line (args exclude the program name). Normal output goes
// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

int run(int argc, char** argv);

}  // namespace l0path::cli
