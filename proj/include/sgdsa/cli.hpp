#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sgdsa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one invocation; `args` excludes the program name.
int parse_and_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Comma-separated list helpers used for --lr-set, --seeds, --hidden, --schedule.
std::vector<double> parse_real_list(const std::string& text, const std::string& flag);
std::vector<unsigned long long> parse_uint_list(const std::string& text, const std::string& flag);

}  // namespace sgdsa::cli
