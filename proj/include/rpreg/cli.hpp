#pragma once

#include <iosfwd>

namespace rpreg::cli {

// Exit codes: 0 success, 1 usage or input error, 2 the solver did not converge
// (results are still written).
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNotConverged = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace rpreg::cli
