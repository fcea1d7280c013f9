// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcprisk::findings {

enum class Tool { CodeQL, Joern, McpScanner };

std::string_view to_string(Tool tool);
Tool tool_from_string(std::string_view text);

struct RawFinding {
  std::string repo_id;
  Tool tool = Tool::CodeQL;
  std::string rule_id;
  std::optional<int> cwe_id;
  std::string file_path; // repo-relative, '/' separated, no ".." segments
  int start_line = 1;
  int end_line = 1;
  std::string message;
};

/// Parser output: findings plus the number of records that could not be
/// attributed to a CWE.
struct ParsedFindings {
  std::vector<RawFinding> findings;
  std::size_t skipped = 0;
};

/// Lexical normalization of a location URI to a repo-relative path: strips a
/// file:// scheme and leading "./", converts '\\' to '/', folds "." and "..".
/// Returns nullopt when the path escapes the repository root.
std::optional<std::string> normalize_path(std::string_view uri);

/// "external/cwe/cwe-089" -> 89. Also accepts "CWE-89" and bare digits.
std::optional<int> parse_cwe_reference(std::string_view text);

/// SARIF 2.1.0. Results whose rule carries no CWE are kept with cwe_id absent
/// and counted in `skipped`; results without a usable location are dropped.
ParsedFindings parse_sarif(std::string_view document, const std::string& repo_id);

/// Two-column (key, cwe_id) configuration tables: Joern query manifest and
/// scanner category map.
using CweLookup = std::map<std::string, int>;
CweLookup parse_cwe_lookup(std::string_view text, std::string_view what);

/// One JSON object per line: {query_id, filename, line_number, snippet}.
ParsedFindings parse_joern_results(std::string_view document, const CweLookup& manifest,
                                   const std::string& repo_id);

/// JSON report: {"findings": [{category, file, detail, line?}]} or a bare array.
ParsedFindings parse_scanner_output(std::string_view document, const CweLookup& category_map,
                                    const std::string& repo_id);

// ---------------------------------------------------------------------------

enum class DedupMode {
  Location, // (repo, cwe, file, 5-line bucket)
  CweLevel, // (repo, cwe)
};

DedupMode dedup_mode_from_string(std::string_view text);
std::string_view to_string(DedupMode mode);

constexpr int kLineBucket = 5;

struct Provenance {
  Tool tool = Tool::CodeQL;
  std::string file;
  int line = 0;

  friend auto operator<=>(const Provenance&, const Provenance&) = default;
};

struct RepoFindingProfile {
  std::string repo_id;
  std::map<int, int> frequencies; // cwe_id -> f_r(c) >= 1
  int total = 0;                  // N_r
  int skipped = 0;
  std::map<int, std::vector<Provenance>> provenance;

  friend bool operator==(const RepoFindingProfile&, const RepoFindingProfile&) = default;
};

using ProfileMap = std::map<std::string, RepoFindingProfile>;

/// Cross-tool deduplication. Findings without a CWE are excluded and counted
/// in the owning repository's `skipped`. Output does not depend on input order.
ProfileMap normalize_and_dedup(std::span<const RawFinding> findings,
                               DedupMode mode = DedupMode::Location);

std::string render_profiles_json(const ProfileMap& profiles);
ProfileMap parse_profiles_json(std::string_view document);

// ---------------------------------------------------------------------------

/// Per-repository analyzer outputs laid out as
///   <dir>/<repo_id>/*.sarif          CodeQL
///   <dir>/<repo_id>/*.joern.jsonl    Joern
///   <dir>/<repo_id>/*.scanner.json   MCP scanner
/// A repository directory with no attributable findings yields an empty profile.
struct IngestOptions {
  DedupMode dedup = DedupMode::Location;
  const CweLookup* joern_manifest = nullptr;
  const CweLookup* scanner_map = nullptr;
  unsigned threads = 0; // 0 = hardware concurrency
};

ProfileMap ingest_directory(const std::filesystem::path& dir, const IngestOptions& options);

} // namespace mcprisk::findings
