#pragma once

#include <string_view>

namespace crowdsel::log {

// Thin wrappers so library headers stay free of spdlog. The level comes from
// the LOG_LEVEL environment variable (error|warn|info|debug, default warn).
void init_from_env();
bool enabled_info();
bool enabled_debug();
void error(std::string_view msg);
void warn(std::string_view msg);
void info(std::string_view msg);
void debug(std::string_view msg);

}  // namespace crowdsel::log
