// SPDX-License-Identifier: Apache-2.0
#include "templink/log.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace templink {

namespace {

LogLevel from_env() {
  const char* v = std::getenv("TEMPLINK_LOG");
  if (v == nullptr) return LogLevel::warn;
  const std::string_view s(v);
  if (s == "error") return LogLevel::error;
  if (s == "info") return LogLevel::info;
  if (s == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

std::atomic<int> g_level{static_cast<int>(from_env())};

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }
void set_log_level(LogLevel level) { g_level.store(static_cast<int>(level)); }

}  // namespace templink
