// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcprisk::table {

using Row = std::vector<std::string>;

/// A delimited-text table with a mandatory header row.
struct Table {
  Row header;
  std::vector<Row> rows;

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Like find_column but raises a parse error naming the missing column.
  std::size_t column(std::string_view name) const;
};

/// RFC 4180 style parsing. The delimiter is ',' unless the header line holds a
/// tab and no comma. Blank lines and lines starting with '#' are skipped.
Table parse(std::string_view text);

/// Always comma-delimited, LF line endings, minimal quoting.
std::string render(const Table& table);

std::string quote(std::string_view field);

/// Strict integer conversion; raises a parse error mentioning `what`.
long long to_integer(std::string_view text, std::string_view what);
double to_real(std::string_view text, std::string_view what);

} // namespace mcprisk::table
