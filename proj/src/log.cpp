#include "singulib/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace singulib {

namespace {

LogLevel parse_level(const char* text) {
  if (!text) return LogLevel::Warn;
  const std::string s(text);
  if (s == "error" || s == "0") return LogLevel::Error;
  if (s == "info" || s == "2") return LogLevel::Info;
  if (s == "debug" || s == "3") return LogLevel::Debug;
  return LogLevel::Warn;
}

const char* name(LogLevel l) {
  switch (l) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_threshold() {
  static const LogLevel level = parse_level(std::getenv("SINGULIB_LOG"));
  return level;
}

void log_message(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[singulib " << name(level) << "] " << msg << '\n';
}

}  // namespace singulib
