#pragma once

#include <string>

namespace singulib {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Threshold read once from SINGULIB_LOG ("error", "warn", "info", "debug"
/// or 0..3). Defaults to warn.
LogLevel log_threshold();

/// Writes "[singulib level] msg" to stderr when level is within the threshold.
void log_message(LogLevel level, const std::string& msg);

}  // namespace singulib
