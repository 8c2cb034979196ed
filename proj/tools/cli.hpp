#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace delayshare::cli {

enum ExitCode { kOk = 0, kInvariantFailure = 1, kInputError = 2, kBudget = 3 };

/// Run one command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace delayshare::cli
