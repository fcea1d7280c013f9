// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "mcprisk/catalog.hpp"
#include "mcprisk/findings.hpp"
#include "mcprisk/scoring.hpp"
#include "mcprisk/surfaces.hpp"

namespace mcprisk::report {

struct ReportInputs {
  std::vector<catalog::RiskRow> risk;
  findings::ProfileMap profiles;
  std::vector<scoring::RepoScore> scores;
  surfaces::SurfaceShares shares;
  surfaces::CooccurrenceMatrix matrix;
  surfaces::SurfaceMap surface_map;
};

enum class Format { Delimited, Json };

/// "delimited"/"csv" or "json"; anything else is Error{Usage}.
Format format_from_string(std::string_view text);

// Per-figure data files, without extension.
inline constexpr std::string_view kCweFrequency = "cwe_frequency";
inline constexpr std::string_view kRepoScatter = "repo_scatter";
inline constexpr std::string_view kSurfaceShares = "surface_shares";
inline constexpr std::string_view kBandDistribution = "band_distribution";
inline constexpr std::string_view kCooccurrence = "cooccurrence";

/// Writes the five data files into `dir` and returns their paths. Raises
/// Error{Usage} "no scored repositories" when nothing was scored.
std::vector<std::filesystem::path> emit_report(const ReportInputs& inputs, Format format,
                                               const std::filesystem::path& dir);

/// Renders one SVG per delimited report file found in `report_dir`. A missing
/// file raises Error{Io} naming it.
std::vector<std::filesystem::path> render_charts(const std::filesystem::path& report_dir,
                                                 const std::filesystem::path& out_dir);

} // namespace mcprisk::report
