// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mcprisk::io {

/// Reads a whole file. Files ending in ".gz" are decompressed transparently.
std::string read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, std::string_view content);

/// FNV-1a 64-bit digest, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::uint64_t fnv1a(std::string_view bytes);

/// Fixed-point rendering used by every emitted table, so reruns are byte-identical.
std::string format_real(double value);

} // namespace mcprisk::io
