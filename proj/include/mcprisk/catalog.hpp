// SPDX-License-Identifier: Apache-2.0
//
// MITRE CWE / CAPEC ingestion and the per-weakness Risk Index.
//
// A weakness is scored through each (CWE, CAPEC) pair linking it to an attack
// pattern:
//
//   likelihood = LA * LE * MI
//   impact     = TS * CC
//   raw risk   = likelihood * impact
//
// LA/LE are ordinal likelihoods (1..3), TS the ordinal typical severity
// (1..5), MI the number of modes of introduction and CC the number of
// consequence entries. A CWE's aggregate raw risk is the maximum over its
// pairs and its Risk Index is that aggregate as a percentage of the catalog
// maximum.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcprisk::catalog {

enum class Likelihood : int { Low = 1, Medium = 2, High = 3 };
enum class Severity : int { VeryLow = 1, Low = 2, Medium = 3, High = 4, VeryHigh = 5 };

/// Case-insensitive label lookup; unrecognized labels yield nullopt.
std::optional<Likelihood> parse_likelihood(std::string_view label);
std::optional<Severity> parse_severity(std::string_view label);
std::string_view label(Likelihood value);
std::string_view label(Severity value);
constexpr int value(Likelihood l) { return static_cast<int>(l); }
constexpr int value(Severity s) { return static_cast<int>(s); }

struct Consequence {
  std::vector<std::string> scopes;
  std::vector<std::string> impacts;
};

struct WeaknessRecord {
  int cwe_id = 0;
  std::string name;
  std::string status;
  std::optional<Likelihood> likelihood_of_exploit;
  std::vector<std::string> modes_of_introduction; // one phase label per Introduction
  std::vector<Consequence> consequences;
  std::vector<int> related_capec_ids;
  /// Member of the Software Development view (CWE-699).
  bool software_view = false;

  std::size_t mi_count() const { return modes_of_introduction.size(); }
  std::size_t cc_count() const { return consequences.size(); }
  std::size_t impact_label_count() const;
};

struct AttackPatternRecord {
  int capec_id = 0;
  std::string name; // verbatim, including any "DEPRECATED:" prefix
  std::string status;
  std::optional<Likelihood> likelihood_of_attack;
  std::optional<Severity> typical_severity;
  std::vector<int> related_cwe_ids;

  bool deprecated() const;
};

struct WeaknessCatalog {
  std::string version;
  std::vector<WeaknessRecord> weaknesses; // document order
  bool has_software_view = false;

  /// Weaknesses in the Software Development view when the catalog carries it,
  /// otherwise all of them.
  std::vector<const WeaknessRecord*> software_weaknesses() const;
  const WeaknessRecord* find(int cwe_id) const;
};

struct AttackPatternCatalog {
  std::string version;
  std::vector<AttackPatternRecord> patterns;

  const AttackPatternRecord* find(int capec_id) const;
};

/// Raises ParseError (with line/column) on malformed XML or a foreign root
/// element, and Error{Integrity} on a duplicate ID.
WeaknessCatalog parse_cwe_catalog(std::string_view xml);
AttackPatternCatalog parse_capec_catalog(std::string_view xml);

// ---------------------------------------------------------------------------
// Pairing, imputation and overrides

enum ImputationFlag : unsigned {
  kLeFromLa = 1u << 0,
  kLaFromLe = 1u << 1,
  kManualOverride = 1u << 2,
};

/// "LE_FROM_LA|MANUAL_OVERRIDE" style rendering; empty for no flags.
std::string flags_to_string(unsigned flags);
unsigned flags_from_string(std::string_view text);

/// A fully resolved, scorable (CWE, CAPEC) pair. capec_id is 0 for a manual
/// entry that carries no attack pattern.
struct CweCapecPair {
  int cwe_id = 0;
  int capec_id = 0;
  int la = 0;
  int le = 0;
  int mi = 0;
  int cc = 0;
  int ts = 0;
  unsigned flags = 0;

  std::int64_t likelihood() const { return std::int64_t{la} * le * mi; }
  std::int64_t impact() const { return std::int64_t{ts} * cc; }
  std::int64_t raw_risk() const { return likelihood() * impact(); }

  friend bool operator==(const CweCapecPair&, const CweCapecPair&) = default;
};

/// A linked pair before imputation; optional fields are still unresolved.
struct PairCandidate {
  int cwe_id = 0;
  int capec_id = 0;
  std::optional<int> la;
  std::optional<int> le;
  std::optional<int> ts;
  int mi = 0;
  int cc = 0;
  unsigned flags = 0;
};

struct Discard {
  int cwe_id = 0;
  int capec_id = 0;
  std::string reason;
};

struct PairSet {
  std::vector<CweCapecPair> pairs;   // sorted by (cwe_id, capec_id)
  std::vector<Discard> discards;     // sorted by (cwe_id, capec_id)
};

/// Manual completion for one CWE. Absent factors fall through to the catalog
/// values and the usual imputation.
struct OverrideRow {
  int cwe_id = 0;
  std::optional<int> le;
  std::optional<int> la;
  std::optional<int> mi;
  std::optional<int> cc;
  std::optional<int> ts;
  std::vector<int> capec_ids; // substitute attack patterns; empty keeps the catalog links
  std::string note;
};

using OverrideTable = std::vector<OverrideRow>;

/// The five manual completions shipped with the tool (CWE-36, 186, 212, 639, 863).
const OverrideTable& default_overrides();
OverrideTable parse_override_table(std::string_view text);
std::string render_override_table(const OverrideTable& table);

/// Links weaknesses to patterns through the union of both sides' references.
/// Links to IDs missing from either catalog are reported as discards.
std::vector<PairCandidate> link_candidates(const WeaknessCatalog& weaknesses,
                                           const AttackPatternCatalog& patterns,
                                           std::vector<Discard>* dangling = nullptr);

/// Applies manual rows to the candidate list. Rows naming an unknown CWE or
/// CAPEC raise Error{Config}.
std::vector<PairCandidate> apply_manual_overrides(std::vector<PairCandidate> candidates,
                                                  const OverrideTable& overrides,
                                                  const WeaknessCatalog& weaknesses,
                                                  const AttackPatternCatalog& patterns);

/// Pairwise imputation (LE from the pair's LA and vice versa) followed by the
/// discard rules: both likelihoods missing, TS missing, MI = 0 or CC = 0.
PairSet resolve_pairs(const std::vector<PairCandidate>& candidates);

/// link -> overrides -> resolve.
PairSet build_pairs(const WeaknessCatalog& weaknesses, const AttackPatternCatalog& patterns,
                    const OverrideTable& overrides = {});

// ---------------------------------------------------------------------------
// Risk Index

struct CweRiskEntry {
  int cwe_id = 0;
  std::vector<CweCapecPair> pairs;
  std::int64_t raw_risk = 0;
  double risk_index = 0.0;

  unsigned flags() const;
};

using RiskIndexMap = std::map<int, CweRiskEntry>;

/// Raises Error{Scoring} when `pairs` is empty.
RiskIndexMap compute_cwe_risk_index(const std::vector<CweCapecPair>& pairs);

/// One row of the emitted risk-index table.
struct RiskRow {
  int cwe_id = 0;
  std::string name;
  std::int64_t raw_risk = 0;
  double risk_index = 0.0;
  unsigned flags = 0;
};

std::vector<RiskRow> risk_rows(const RiskIndexMap& index, const WeaknessCatalog& weaknesses);
std::string render_risk_table(const std::vector<RiskRow>& rows);
std::vector<RiskRow> parse_risk_table(std::string_view text);

/// cwe_id -> risk index, the weight w(c) used by repository scoring.
std::map<int, double> risk_weights(const std::vector<RiskRow>& rows);
std::map<int, double> risk_weights(const RiskIndexMap& index);

// ---------------------------------------------------------------------------
// Exploratory statistics over the raw catalogs

struct Distribution {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0; // population
  int max = 0;
  std::map<int, std::size_t> histogram; // count value -> number of records
};

Distribution distribution_of(const std::vector<int>& values);

struct LabelCounts {
  std::size_t missing = 0;
  std::map<std::string, std::size_t> by_label;
  double missing_pct(std::size_t total) const;
};

struct CatalogStats {
  std::string cwe_version;
  std::string capec_version;
  bool software_view_only = false;
  std::size_t weakness_count = 0;
  std::size_t pattern_count = 0;

  LabelCounts likelihood_of_exploit;
  LabelCounts likelihood_of_attack;
  LabelCounts typical_severity;
  double le_missing_pct = 0.0;
  double la_missing_pct = 0.0;
  double ts_missing_pct = 0.0;

  Distribution modes_of_introduction;
  Distribution consequence_entries;
  Distribution impact_labels; // individual Impact elements per weakness
  std::size_t impact_label_total = 0;
  std::size_t distinct_impact_labels = 0;
  std::vector<std::pair<std::string, std::size_t>> top_impacts; // descending count, then label
};

CatalogStats catalog_stats(const WeaknessCatalog& weaknesses, const AttackPatternCatalog& patterns,
                           std::size_t top_k = 5);
std::string render_stats_json(const CatalogStats& stats);

// ---------------------------------------------------------------------------

/// Everything the scoring stages need from the catalogs, built once and then
/// shared read-only.
struct ScoredCatalog {
  WeaknessCatalog weaknesses;
  AttackPatternCatalog patterns;
  PairSet pairs;
  RiskIndexMap index;
};

ScoredCatalog build_scored_catalog(std::string_view cwe_xml, std::string_view capec_xml,
                                   const OverrideTable& overrides);

} // namespace mcprisk::catalog
