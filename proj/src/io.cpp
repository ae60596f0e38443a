// SPDX-License-Identifier: Apache-2.0
#include "templink/io.hpp"

#include <cstdio>
#include <sstream>

namespace templink {

CsvReader::CsvReader(const std::filesystem::path& path, std::string_view expected_header)
    : path_(path), in_(path) {
  if (!in_) fail(ErrorCode::io_error, "cannot open " + path.string());
  if (!expected_header.empty()) {
    if (!std::getline(in_, buffer_)) error("missing header");
    ++line_no_;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    if (buffer_ != expected_header) {
      error("unexpected header '" + buffer_ + "', expected '" + std::string(expected_header) + "'");
    }
  }
}

bool CsvReader::next(std::vector<std::string_view>& fields) {
  while (std::getline(in_, buffer_)) {
    ++line_no_;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    if (buffer_.empty()) continue;
    fields.clear();
    std::string_view rest(buffer_);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return true;
  }
  return false;
}

void CsvReader::error(const std::string& what) const {
  fail(ErrorCode::parse_error, path_.string() + ":" + std::to_string(line_no_) + ": " + what);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

}  // namespace templink
