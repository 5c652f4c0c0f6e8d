#pragma once

#include <string>

namespace veloreg {

/// Verbosity from the VELOREG_LOG environment variable:
/// unset/"quiet" = 0, "info" = 1, "debug" = 2.
enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level();
void log_line(LogLevel level, const std::string& msg);

} // namespace veloreg
