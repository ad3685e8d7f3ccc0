#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace dcal {

// Minimal stderr logger gated by the DCAL_LOG environment variable
// (error|warn|info|debug); stdout stays machine-clean for artifacts.
enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("DCAL_LOG");
    if (!env) return LogLevel::warn;
    const std::string s(env);
    if (s == "error") return LogLevel::error;
    if (s == "warn") return LogLevel::warn;
    if (s == "info") return LogLevel::info;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

inline void log_line(LogLevel level, const std::string& msg) {
  if (level > log_threshold()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

}  // namespace dcal
