#pragma once

#include <iosfwd>

namespace swarman::cli {

enum ExitCode : int {
    kOk = 0,
    kUsageError = 1,    // bad flags, unreadable or malformed config / referenced files
    kRuntimeError = 2,  // validation or simulation failure
};

/// Entry point shared by the executable and in-process tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace swarman::cli
