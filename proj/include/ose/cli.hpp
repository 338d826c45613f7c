#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ose::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;   // parse / precondition / parameter errors
inline constexpr int kInfeasible = 2;   // e.g. d * r > n

/// Runs one subcommand (gen, check, adversary, sweep, audit, demo). args
/// excludes the program name. Diagnostics go to err as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Decimal or a fraction "p/q" (e.g. 1/32).
double parse_real(std::string_view text);

}  // namespace ose::cli
