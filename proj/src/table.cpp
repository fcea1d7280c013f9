// SPDX-License-Identifier: Apache-2.0
#include "mcprisk/table.hpp"

#include <charconv>
#include <cstdlib>

#include <fmt/format.h>

#include "mcprisk/error.hpp"

namespace mcprisk::table {

namespace {

char detect_delimiter(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    if (line.empty() || line == "\r" || line.front() == '#')
      continue;
    if (line.find('\t') != line.npos && line.find(',') == line.npos)
      return '\t';
    return ',';
  }
  return ',';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

} // namespace

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name)
      return i;
  return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
  if (auto idx = find_column(name))
    return *idx;
  throw ParseError(fmt::format("missing column '{}'", name));
}

Table parse(std::string_view text) {
  const char delim = detect_delimiter(text);
  std::vector<Row> records;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool quoted = false;
  bool at_record_start = true;
  unsigned long line = 1;
  unsigned long record_line = 1;

  auto end_field = [&] {
    row.push_back(quoted ? field : std::string(trim(field)));
    field.clear();
    quoted = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = row.size() == 1 && row.front().empty();
    if (!blank)
      records.push_back(std::move(row));
    row.clear();
    at_record_start = true;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (at_record_start) {
      record_line = line;
      if (c == '#') {
        while (i < text.size() && text[i] != '\n')
          ++i;
        ++line;
        continue;
      }
      at_record_start = false;
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n')
          ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      in_quotes = true;
      quoted = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\n') {
      end_record();
      ++line;
    } else if (c != '\r' || quoted) {
      if (!quoted)
        field.push_back(c);
    }
  }
  if (in_quotes)
    throw ParseError("unterminated quoted field", record_line, 1);
  if (!at_record_start)
    end_record();

  Table table;
  if (records.empty())
    return table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    Row& rec = records[r];
    if (rec.size() > table.header.size())
      throw ParseError(fmt::format("row {} has {} fields, header has {}", r + 1, rec.size(),
                                   table.header.size()));
    rec.resize(table.header.size());
    table.rows.push_back(std::move(rec));
  }
  return table;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos && !field.empty() &&
      field.front() != ' ' && field.back() != ' ' && field.front() != '#')
    return std::string(field);
  if (field.empty())
    return {};
  std::string out = "\"";
  for (char c : field) {
    if (c == '"')
      out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string render(const Table& table) {
  std::string out;
  auto emit = [&out](const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i)
        out.push_back(',');
      out += quote(row[i]);
    }
    out.push_back('\n');
  };
  emit(table.header);
  for (const auto& row : table.rows)
    emit(row);
  return out;
}

long long to_integer(std::string_view text, std::string_view what) {
  text = trim(text);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(fmt::format("invalid integer '{}' for {}", text, what));
  return value;
}

double to_real(std::string_view text, std::string_view what) {
  text = trim(text);
  std::string copy(text);
  char* end = nullptr;
  double value = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size())
    throw ParseError(fmt::format("invalid number '{}' for {}", text, what));
  return value;
}

} // namespace mcprisk::table
