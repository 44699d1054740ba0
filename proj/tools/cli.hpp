#pragma once

#include <iosfwd>

namespace sstem::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;        // per-video or other runtime failure
inline constexpr int kExitUsage = 2;          // invalid arguments or inputs
inline constexpr int kExitBackend = 3;        // backend unavailable
inline constexpr int kExitFit = 4;            // rank deficient / too few samples
inline constexpr int kExitAlignment = 5;      // label alignment failure
inline constexpr int kExitBind = 6;           // serve could not bind its port

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sstem::cli
