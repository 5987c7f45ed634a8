#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ramc::cli {

/// Entry point behind the `ramc` binary; testable in-process.
/// Exit codes: 0 success, 2 environment/IO, 64 usage.
/// stdout carries data, stderr carries diagnostics.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ramc::cli
