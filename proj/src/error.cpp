// SPDX-License-Identifier: Apache-2.0
#include "mcprisk/error.hpp"

#include <fmt/format.h>

namespace mcprisk {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::Usage: return "usage error";
  case ErrorKind::Config: return "configuration error";
  case ErrorKind::Parse: return "parse error";
  case ErrorKind::Scoring: return "scoring error";
  case ErrorKind::Integrity: return "integrity error";
  case ErrorKind::Io: return "i/o error";
  case ErrorKind::Auth: return "authentication error";
  case ErrorKind::RateLimit: return "rate limit exhausted";
  case ErrorKind::Network: return "network error";
  case ErrorKind::Schema: return "schema mismatch";
  case ErrorKind::NotFound: return "not found";
  }
  return "error";
}

namespace {

std::string with_position(const std::string& message, unsigned long line, unsigned long column) {
  if (line == 0)
    return message;
  return fmt::format("{} (line {}, column {})", message, line, column);
}

} // namespace

ParseError::ParseError(const std::string& message, unsigned long line, unsigned long column)
    : Error(ErrorKind::Parse, with_position(message, line, column)), line_(line), column_(column) {}

} // namespace mcprisk
