// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "mcprisk/findings.hpp"

namespace mcprisk::pipeline {

// Artifact names inside the output directory.
inline constexpr std::string_view kRiskIndexFile = "risk_index.csv";
inline constexpr std::string_view kCatalogStatsFile = "catalog_stats.json";
inline constexpr std::string_view kDiscardsFile = "pair_discards.csv";
inline constexpr std::string_view kProfilesFile = "profiles.json";
inline constexpr std::string_view kSkippedFile = "skipped.csv";
inline constexpr std::string_view kScoresCsvFile = "scores.csv";
inline constexpr std::string_view kScoresJsonFile = "scores.json";
inline constexpr std::string_view kBandsFile = "band_distribution.csv";
inline constexpr std::string_view kSharesFile = "surface_shares.csv";
inline constexpr std::string_view kMatrixCsvFile = "cooccurrence.csv";
inline constexpr std::string_view kMatrixJsonFile = "cooccurrence.json";
inline constexpr std::string_view kChainsFile = "chains.csv";
inline constexpr std::string_view kManifestFile = "run_manifest.json";
inline constexpr std::string_view kReportDir = "report";
inline constexpr std::string_view kChartsDir = "charts";

enum class Stage { Catalog, Ingest, Score, Surfaces, Report, Run };

/// Keys are the CLI flag names without leading dashes ("cwe-xml", "dedup", ...).
struct PipelineConfig {
  std::filesystem::path cwe_xml;
  std::filesystem::path capec_xml;
  std::filesystem::path overrides;   // empty: built-in manual completions
  std::filesystem::path surface_map; // empty: built-in table
  std::filesystem::path joern_manifest;
  std::filesystem::path scanner_map;
  std::filesystem::path findings_dir;
  std::filesystem::path out;
  findings::DedupMode dedup = findings::DedupMode::Location;
  std::string report_format = "delimited";
  double chain_threshold = 85.0;
  bool render = false;
  unsigned threads = 0;

  /// Raises Error{Config} on an unknown key or a bad value.
  void set(std::string_view key, std::string_view value);
  /// Applies every key of a JSON object through set().
  void merge_json(std::string_view json_text);
  std::string canonical_json() const;
};

/// Raises Error{Config} when a file the stage needs is missing or the output
/// directory cannot be created.
void validate(const PipelineConfig& config, Stage stage);

void run_catalog_stage(const PipelineConfig& config);
void run_ingest_stage(const PipelineConfig& config);
void run_score_stage(const PipelineConfig& config);
void run_surfaces_stage(const PipelineConfig& config);
void run_report_stage(const PipelineConfig& config);

/// All stages in order into a staging directory; artifacts are moved into
/// `out` only when every stage succeeded.
void run_pipeline(const PipelineConfig& config);

struct HarvestConfig {
  std::string query;
  int page_limit = 10;
  std::filesystem::path replay; // recorded responses; required unless live
  bool live = false;
  std::filesystem::path rules;  // empty: built-in exclusion rules
  std::filesystem::path out;    // manifest path
  std::string snapshot_time;    // empty: recording time, or now when live
  std::string api_base;

  void set(std::string_view key, std::string_view value);
};

struct HarvestSummary {
  std::size_t fetched = 0;
  std::size_t retained = 0;
  std::size_t excluded = 0;
  std::size_t warnings = 0;
};

HarvestSummary run_harvest(const HarvestConfig& config);

} // namespace mcprisk::pipeline
