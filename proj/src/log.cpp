#include "mocm/log.hpp"

#include <atomic>
#include <iostream>

namespace mocm {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::Warn)};
}

void set_log_level(LogLevel level) { g_level.store(static_cast<int>(level)); }

LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log_warn(const std::string& msg) {
  if (g_level.load() >= static_cast<int>(LogLevel::Warn)) {
    std::cerr << "[warn] " << msg << '\n';
  }
}

void log_info(const std::string& msg) {
  if (g_level.load() >= static_cast<int>(LogLevel::Info)) {
    std::cerr << "[info] " << msg << '\n';
  }
}

void log_debug(const std::string& msg) {
  if (g_level.load() >= static_cast<int>(LogLevel::Debug)) {
    std::cerr << "[debug] " << msg << '\n';
  }
}

}  // namespace mocm
