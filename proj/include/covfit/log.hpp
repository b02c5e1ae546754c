#pragma once

#include <cstdarg>

namespace covfit {

/// Diagnostic verbosity, read once from the COVFIT_LOG environment variable
/// (off | info | trace). Messages go to standard error.
enum class LogLevel { off = 0, info = 1, trace = 2 };

LogLevel log_level();

bool log_enabled(LogLevel level);

void log_line(LogLevel level, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;

}  // namespace covfit
