#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace crowdsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Merges a flat key=value file into `args`: each key becomes `--key value`
/// unless the flag is already present. Lines starting with '#' are ignored.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const std::string& config_text);

/// "1-3,7" -> {1,2,3,7}
std::vector<long long> parse_int_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace crowdsel::cli
