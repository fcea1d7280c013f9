// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcprisk {

/// Error families. Numeric values are shared with the C API status codes, and
/// the first four double as CLI exit codes.
enum class ErrorKind : int {
  Usage = 1,
  Config = 2,
  Parse = 3,
  Scoring = 4,
  Integrity = 5,
  Io = 6,
  Auth = 7,
  RateLimit = 8,
  Network = 9,
  Schema = 10,
  NotFound = 11,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Parse failure with a source position. Line and column are 1-based; zero
/// means the position is unknown.
class ParseError : public Error {
public:
  ParseError(const std::string& message, unsigned long line = 0, unsigned long column = 0);

  unsigned long line() const noexcept { return line_; }
  unsigned long column() const noexcept { return column_; }

private:
  unsigned long line_;
  unsigned long column_;
};

} // namespace mcprisk
