// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace templink {

enum class ErrorCode {
  invalid_argument,
  parse_error,
  io_error,
  config_error,
  numeric_error,
  not_differentiable,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library. The code is stable and is what the
/// CLI prints as the machine-parsable prefix of its error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::invalid_argument, message);
}

}  // namespace templink
