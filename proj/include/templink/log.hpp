// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iostream>
#include <sstream>
#include <utility>

namespace templink {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Level from the TEMPLINK_LOG environment variable (default: warn).
LogLevel log_level();
void set_log_level(LogLevel level);

template <class... Args>
void log(LogLevel level, Args&&... args) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::ostringstream line;
  line << "[templink] ";
  (line << ... << std::forward<Args>(args));
  line << '\n';
  std::cerr << line.str();
}

template <class... Args>
void log_info(Args&&... args) {
  log(LogLevel::info, std::forward<Args>(args)...);
}

template <class... Args>
void log_debug(Args&&... args) {
  log(LogLevel::debug, std::forward<Args>(args)...);
}

}  // namespace templink
