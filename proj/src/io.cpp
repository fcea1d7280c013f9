// SPDX-License-Identifier: Apache-2.0
#include "mcprisk/io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>
#include <zlib.h>

#include "mcprisk/error.hpp"

namespace mcprisk::io {

namespace {

std::string read_gzip(const std::filesystem::path& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr)
    throw Error(ErrorKind::Io, fmt::format("cannot open {}", path.string()));
  std::string out;
  char buffer[1 << 16];
  for (;;) {
    int n = gzread(file, buffer, sizeof buffer);
    if (n < 0) {
      int code = 0;
      std::string msg = gzerror(file, &code);
      gzclose(file);
      throw Error(ErrorKind::Io, fmt::format("cannot decompress {}: {}", path.string(), msg));
    }
    if (n == 0)
      break;
    out.append(buffer, static_cast<std::size_t>(n));
  }
  gzclose(file);
  return out;
}

} // namespace

std::string read_file(const std::filesystem::path& path) {
  if (path.extension() == ".gz")
    return read_gzip(path);
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Io, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    throw Error(ErrorKind::Io, fmt::format("cannot read {}", path.string()));
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fnv1a_hex(std::string_view bytes) { return fmt::format("{:016x}", fnv1a(bytes)); }

std::string format_real(double value) {
  if (value == 0.0 || std::abs(value) < 5e-10)
    return "0.000000000";
  return fmt::format("{:.9f}", value);
}

} // namespace mcprisk::io
