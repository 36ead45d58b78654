#include "crowdsel/log.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace crowdsel::log {

namespace {

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("crowdsel");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return *instance;
}

std::once_flag env_once;

}  // namespace

void init_from_env() {
  std::call_once(env_once, [] {
    const char* raw = std::getenv("LOG_LEVEL");
    const std::string level = raw ? raw : "warn";
    if (level == "error") {
      logger().set_level(spdlog::level::err);
    } else if (level == "info") {
      logger().set_level(spdlog::level::info);
    } else if (level == "debug") {
      logger().set_level(spdlog::level::debug);
    } else {
      logger().set_level(spdlog::level::warn);
    }
  });
}

bool enabled_info() {
  init_from_env();
  return logger().should_log(spdlog::level::info);
}

bool enabled_debug() {
  init_from_env();
  return logger().should_log(spdlog::level::debug);
}

void error(std::string_view msg) {
  init_from_env();
  logger().error("{}", msg);
}

void warn(std::string_view msg) {
  init_from_env();
  logger().warn("{}", msg);
}

void info(std::string_view msg) {
  init_from_env();
  logger().info("{}", msg);
}

void debug(std::string_view msg) {
  init_from_env();
  logger().debug("{}", msg);
}

}  // namespace crowdsel::log
