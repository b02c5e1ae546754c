#include "covfit/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace covfit {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("COVFIT_LOG");
    if (env == nullptr || std::strcmp(env, "off") == 0 || env[0] == '\0') return LogLevel::off;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    if (std::strcmp(env, "trace") == 0) return LogLevel::trace;
    std::fprintf(stderr, "covfit: ignoring unknown COVFIT_LOG value '%s'\n", env);
    return LogLevel::off;
  }();
  return level;
}

bool log_enabled(LogLevel level) {
  return static_cast<int>(log_level()) >= static_cast<int>(level);
}

void log_line(LogLevel level, const char* fmt, ...) {
  if (!log_enabled(level)) return;
  std::va_list args;
  va_start(args, fmt);
  std::fprintf(stderr, "covfit: ");
  std::vfprintf(stderr, fmt, args);
  std::fprintf(stderr, "\n");
  va_end(args);
}

}  // namespace covfit
