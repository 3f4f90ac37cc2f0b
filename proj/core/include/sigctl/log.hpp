#pragma once

#include <functional>
#include <string>

namespace sigctl {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kSilent = 4 };

// Process-wide sink; defaults to stderr at kWarning. Thread-safe.
void set_log_level(LogLevel level);
LogLevel log_level();
void set_log_sink(std::function<void(LogLevel, const std::string&)> sink);

void log_message(LogLevel level, const std::string& message);
inline void log_info(const std::string& message) { log_message(LogLevel::kInfo, message); }
inline void log_warning(const std::string& message) { log_message(LogLevel::kWarning, message); }

}  // namespace sigctl
