#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thpsim::cli {

// simulate/optimize exit codes, for shell sweeps.
namespace exit_code {
inline constexpr int breach = 0;
inline constexpr int ok = 0;
inline constexpr int error = 1;
inline constexpr int no_breach = 2;
inline constexpr int abort_qber = 3;
inline constexpr int usage = 64;
}  // namespace exit_code

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience for tests: args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thpsim::cli
