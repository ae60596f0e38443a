// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "templink/error.hpp"

namespace templink {

/// Line-oriented reader for the comma-separated files this project emits.
/// Fields are views into the current line and are invalidated by next().
class CsvReader {
 public:
  /// Opens `path`; when `expected_header` is non-empty the first line must
  /// match it exactly.
  CsvReader(const std::filesystem::path& path, std::string_view expected_header);

  bool next(std::vector<std::string_view>& fields);
  std::size_t line() const noexcept { return line_no_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  /// Builds a parse error that names the file and current line.
  [[noreturn]] void error(const std::string& what) const;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::string buffer_;
  std::size_t line_no_ = 0;
};

template <class T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

template <class T>
T parse_field(const CsvReader& reader, std::string_view text, const char* name) {
  T value{};
  if (!parse_number(text, value)) {
    reader.error(std::string("malformed ") + name + " '" + std::string(text) + "'");
  }
  return value;
}

std::ofstream open_output(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

/// Fixed-precision decimal used by every text artifact, so reruns are
/// byte-identical.
std::string format_double(double value, int digits = 6);

}  // namespace templink
