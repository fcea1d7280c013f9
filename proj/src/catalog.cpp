// SPDX-License-Identifier: Apache-2.0
#include "mcprisk/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "mcprisk/error.hpp"
#include "mcprisk/io.hpp"
#include "mcprisk/table.hpp"

namespace mcprisk::catalog {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct FlagName {
  unsigned flag;
  std::string_view name;
};

constexpr FlagName kFlagNames[] = {
    {kLeFromLa, "LE_FROM_LA"},
    {kLaFromLe, "LA_FROM_LE"},
    {kManualOverride, "MANUAL_OVERRIDE"},
};

} // namespace

std::optional<Likelihood> parse_likelihood(std::string_view text) {
  auto l = lower(text);
  if (l == "low")
    return Likelihood::Low;
  if (l == "medium")
    return Likelihood::Medium;
  if (l == "high")
    return Likelihood::High;
  return std::nullopt;
}

std::optional<Severity> parse_severity(std::string_view text) {
  auto l = lower(text);
  if (l == "very low")
    return Severity::VeryLow;
  if (l == "low")
    return Severity::Low;
  if (l == "medium")
    return Severity::Medium;
  if (l == "high")
    return Severity::High;
  if (l == "very high")
    return Severity::VeryHigh;
  return std::nullopt;
}

std::string_view label(Likelihood value) {
  switch (value) {
  case Likelihood::Low: return "Low";
  case Likelihood::Medium: return "Medium";
  case Likelihood::High: return "High";
  }
  return "";
}

std::string_view label(Severity value) {
  switch (value) {
  case Severity::VeryLow: return "Very Low";
  case Severity::Low: return "Low";
  case Severity::Medium: return "Medium";
  case Severity::High: return "High";
  case Severity::VeryHigh: return "Very High";
  }
  return "";
}

std::size_t WeaknessRecord::impact_label_count() const {
  std::size_t n = 0;
  for (const auto& c : consequences)
    n += c.impacts.size();
  return n;
}

bool AttackPatternRecord::deprecated() const {
  return status == "Deprecated" || name.starts_with("DEPRECATED");
}

std::vector<const WeaknessRecord*> WeaknessCatalog::software_weaknesses() const {
  std::vector<const WeaknessRecord*> out;
  for (const auto& w : weaknesses)
    if (!has_software_view || w.software_view)
      out.push_back(&w);
  return out;
}

const WeaknessRecord* WeaknessCatalog::find(int cwe_id) const {
  for (const auto& w : weaknesses)
    if (w.cwe_id == cwe_id)
      return &w;
  return nullptr;
}

const AttackPatternRecord* AttackPatternCatalog::find(int capec_id) const {
  for (const auto& p : patterns)
    if (p.capec_id == capec_id)
      return &p;
  return nullptr;
}

std::string flags_to_string(unsigned flags) {
  std::string out;
  for (const auto& f : kFlagNames) {
    if (flags & f.flag) {
      if (!out.empty())
        out.push_back('|');
      out += f.name;
    }
  }
  return out;
}

unsigned flags_from_string(std::string_view text) {
  unsigned flags = 0;
  while (!text.empty()) {
    auto bar = text.find('|');
    auto token = text.substr(0, bar);
    bool known = false;
    for (const auto& f : kFlagNames) {
      if (token == f.name) {
        flags |= f.flag;
        known = true;
      }
    }
    if (!known && !token.empty())
      throw ParseError(fmt::format("unknown imputation flag '{}'", token));
    if (bar == text.npos)
      break;
    text.remove_prefix(bar + 1);
  }
  return flags;
}

// ---------------------------------------------------------------------------
// Overrides

const OverrideTable& default_overrides() {
  static const OverrideTable table = [] {
    OverrideTable t;
    t.push_back({36, std::nullopt, 3, std::nullopt, std::nullopt, 5, {597},
                 "CAPEC-597 lacks LA and TS; values taken from parent CWE-22"});
    t.push_back({186, std::nullopt, std::nullopt, std::nullopt, 1, std::nullopt, {6, 15, 79},
                 "no CAPEC mapping; patterns from sibling CWE-185 with CC reduced to 1"});
    t.push_back({212, 3, 3, std::nullopt, std::nullopt, std::nullopt, {168},
                 "CAPEC-168 lacks LA and CWE-212 lacks LE; both set to High"});
    t.push_back({639, 3, 3, 1, 3, 5, {},
                 "no CAPEC mapping; factors inherited from CWE-22"});
    t.push_back({863, std::nullopt, std::nullopt, std::nullopt, std::nullopt, std::nullopt, {114, 3},
                 "no CAPEC mapping; patterns inherited from parent CWE-285"});
    return t;
  }();
  return table;
}

OverrideTable parse_override_table(std::string_view text) {
  auto t = table::parse(text);
  OverrideTable out;
  if (t.header.empty())
    return out;
  const auto c_id = t.column("cwe_id");
  auto factor = [&](const table::Row& row, std::string_view col, int lo, int hi) -> std::optional<int> {
    auto idx = t.find_column(col);
    if (!idx || row[*idx].empty())
      return std::nullopt;
    auto v = table::to_integer(row[*idx], col);
    if (v < lo || v > hi)
      throw Error(ErrorKind::Config,
                  fmt::format("override for CWE-{}: {}={} outside [{}, {}]", row[c_id], col, v, lo, hi));
    return static_cast<int>(v);
  };
  std::set<int> seen;
  for (const auto& row : t.rows) {
    OverrideRow o;
    o.cwe_id = static_cast<int>(table::to_integer(row[c_id], "cwe_id"));
    if (!seen.insert(o.cwe_id).second)
      throw Error(ErrorKind::Config, fmt::format("duplicate override for CWE-{}", o.cwe_id));
    o.le = factor(row, "le", 1, 3);
    o.la = factor(row, "la", 1, 3);
    o.mi = factor(row, "mi", 1, 1000);
    o.cc = factor(row, "cc", 1, 1000);
    o.ts = factor(row, "ts", 1, 5);
    if (auto idx = t.find_column("capec_ids")) {
      std::string_view ids = row[*idx];
      while (!ids.empty()) {
        auto sep = ids.find_first_of(";| ");
        auto tok = ids.substr(0, sep);
        if (!tok.empty())
          o.capec_ids.push_back(static_cast<int>(table::to_integer(tok, "capec_ids")));
        if (sep == ids.npos)
          break;
        ids.remove_prefix(sep + 1);
      }
    }
    if (auto idx = t.find_column("note"))
      o.note = row[*idx];
    out.push_back(std::move(o));
  }
  return out;
}

std::string render_override_table(const OverrideTable& overrides) {
  table::Table t;
  t.header = {"cwe_id", "le", "la", "mi", "cc", "ts", "capec_ids", "note"};
  auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  for (const auto& o : overrides) {
    std::string ids;
    for (std::size_t i = 0; i < o.capec_ids.size(); ++i)
      ids += (i ? ";" : "") + std::to_string(o.capec_ids[i]);
    t.rows.push_back({std::to_string(o.cwe_id), opt(o.le), opt(o.la), opt(o.mi), opt(o.cc), opt(o.ts),
                      ids, o.note});
  }
  return table::render(t);
}

// ---------------------------------------------------------------------------
// Pairing

namespace {

PairCandidate candidate_for(const WeaknessRecord& w, const AttackPatternRecord* p) {
  PairCandidate c;
  c.cwe_id = w.cwe_id;
  c.capec_id = p ? p->capec_id : 0;
  if (w.likelihood_of_exploit)
    c.le = value(*w.likelihood_of_exploit);
  if (p && p->likelihood_of_attack)
    c.la = value(*p->likelihood_of_attack);
  if (p && p->typical_severity)
    c.ts = value(*p->typical_severity);
  c.mi = static_cast<int>(w.mi_count());
  c.cc = static_cast<int>(w.cc_count());
  return c;
}

} // namespace

std::vector<PairCandidate> link_candidates(const WeaknessCatalog& weaknesses,
                                           const AttackPatternCatalog& patterns,
                                           std::vector<Discard>* dangling) {
  std::map<int, const WeaknessRecord*> w_by_id;
  std::map<int, const AttackPatternRecord*> p_by_id;
  for (const auto& w : weaknesses.weaknesses)
    w_by_id.emplace(w.cwe_id, &w);
  for (const auto& p : patterns.patterns)
    p_by_id.emplace(p.capec_id, &p);

  std::set<std::pair<int, int>> links;
  for (const auto& w : weaknesses.weaknesses)
    for (int capec : w.related_capec_ids)
      links.emplace(w.cwe_id, capec);
  for (const auto& p : patterns.patterns)
    for (int cwe : p.related_cwe_ids)
      links.emplace(cwe, p.capec_id);

  std::vector<PairCandidate> out;
  for (auto [cwe, capec] : links) {
    auto wi = w_by_id.find(cwe);
    auto pi = p_by_id.find(capec);
    if (wi == w_by_id.end() || pi == p_by_id.end()) {
      if (dangling)
        dangling->push_back({cwe, capec,
                             wi == w_by_id.end() ? "CWE not in catalog" : "CAPEC not in catalog"});
      continue;
    }
    out.push_back(candidate_for(*wi->second, pi->second));
  }
  return out;
}

std::vector<PairCandidate> apply_manual_overrides(std::vector<PairCandidate> candidates,
                                                  const OverrideTable& overrides,
                                                  const WeaknessCatalog& weaknesses,
                                                  const AttackPatternCatalog& patterns) {
  for (const auto& o : overrides) {
    const WeaknessRecord* w = weaknesses.find(o.cwe_id);
    if (w == nullptr)
      throw Error(ErrorKind::Config, fmt::format("override references CWE-{}, which is not in the catalog", o.cwe_id));

    if (!o.capec_ids.empty()) {
      std::erase_if(candidates, [&](const PairCandidate& c) { return c.cwe_id == o.cwe_id; });
      for (int capec : o.capec_ids) {
        const AttackPatternRecord* p = patterns.find(capec);
        if (p == nullptr)
          throw Error(ErrorKind::Config,
                      fmt::format("override for CWE-{} references CAPEC-{}, which is not in the catalog",
                                  o.cwe_id, capec));
        candidates.push_back(candidate_for(*w, p));
      }
    } else if (std::none_of(candidates.begin(), candidates.end(),
                            [&](const PairCandidate& c) { return c.cwe_id == o.cwe_id; })) {
      candidates.push_back(candidate_for(*w, nullptr));
    }

    for (auto& c : candidates) {
      if (c.cwe_id != o.cwe_id)
        continue;
      if (o.le) c.le = *o.le;
      if (o.la) c.la = *o.la;
      if (o.ts) c.ts = *o.ts;
      if (o.mi) c.mi = *o.mi;
      if (o.cc) c.cc = *o.cc;
      c.flags |= kManualOverride;
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const PairCandidate& a, const PairCandidate& b) {
    return std::tie(a.cwe_id, a.capec_id) < std::tie(b.cwe_id, b.capec_id);
  });
  return candidates;
}

PairSet resolve_pairs(const std::vector<PairCandidate>& candidates) {
  PairSet out;
  for (const auto& c : candidates) {
    auto discard = [&](std::string reason) { out.discards.push_back({c.cwe_id, c.capec_id, std::move(reason)}); };
    if (!c.le && !c.la) {
      discard("LE and LA both missing");
      continue;
    }
    if (!c.ts) {
      discard("TS missing");
      continue;
    }
    if (c.mi <= 0) {
      discard("no modes of introduction");
      continue;
    }
    if (c.cc <= 0) {
      discard("no common consequences");
      continue;
    }
    CweCapecPair p;
    p.cwe_id = c.cwe_id;
    p.capec_id = c.capec_id;
    p.flags = c.flags;
    p.le = c.le ? *c.le : *c.la;
    p.la = c.la ? *c.la : *c.le;
    if (!c.le)
      p.flags |= kLeFromLa;
    if (!c.la)
      p.flags |= kLaFromLe;
    p.ts = *c.ts;
    p.mi = c.mi;
    p.cc = c.cc;
    out.pairs.push_back(p);
  }
  auto key = [](const auto& x) { return std::tie(x.cwe_id, x.capec_id); };
  std::sort(out.pairs.begin(), out.pairs.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::sort(out.discards.begin(), out.discards.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  return out;
}

PairSet build_pairs(const WeaknessCatalog& weaknesses, const AttackPatternCatalog& patterns,
                    const OverrideTable& overrides) {
  std::vector<Discard> dangling;
  auto candidates = link_candidates(weaknesses, patterns, &dangling);
  candidates = apply_manual_overrides(std::move(candidates), overrides, weaknesses, patterns);
  auto set = resolve_pairs(candidates);
  set.discards.insert(set.discards.end(), dangling.begin(), dangling.end());
  std::sort(set.discards.begin(), set.discards.end(), [](const Discard& a, const Discard& b) {
    return std::tie(a.cwe_id, a.capec_id, a.reason) < std::tie(b.cwe_id, b.capec_id, b.reason);
  });
  return set;
}

// ---------------------------------------------------------------------------
// Risk Index

unsigned CweRiskEntry::flags() const {
  unsigned f = 0;
  for (const auto& p : pairs)
    f |= p.flags;
  return f;
}

RiskIndexMap compute_cwe_risk_index(const std::vector<CweCapecPair>& pairs) {
  if (pairs.empty())
    throw Error(ErrorKind::Scoring, "no scorable CWE-CAPEC pairs");
  RiskIndexMap index;
  for (const auto& p : pairs) {
    auto& e = index[p.cwe_id];
    e.cwe_id = p.cwe_id;
    e.pairs.push_back(p);
    e.raw_risk = std::max(e.raw_risk, p.raw_risk());
  }
  std::int64_t max_raw = 0;
  for (auto& [id, e] : index) {
    std::sort(e.pairs.begin(), e.pairs.end(), [](const CweCapecPair& a, const CweCapecPair& b) {
      return a.capec_id < b.capec_id;
    });
    max_raw = std::max(max_raw, e.raw_risk);
  }
  for (auto& [id, e] : index)
    e.risk_index = 100.0 * static_cast<double>(e.raw_risk) / static_cast<double>(max_raw);
  return index;
}

std::vector<RiskRow> risk_rows(const RiskIndexMap& index, const WeaknessCatalog& weaknesses) {
  std::map<int, const std::string*> names;
  for (const auto& w : weaknesses.weaknesses)
    names.emplace(w.cwe_id, &w.name);
  std::vector<RiskRow> rows;
  for (const auto& [id, e] : index) {
    auto n = names.find(id);
    rows.push_back({id, n == names.end() ? std::string() : *n->second, e.raw_risk, e.risk_index, e.flags()});
  }
  return rows;
}

std::string render_risk_table(const std::vector<RiskRow>& rows) {
  table::Table t;
  t.header = {"cwe_id", "name", "raw_risk", "risk_index", "imputation_flags"};
  for (const auto& r : rows)
    t.rows.push_back({std::to_string(r.cwe_id), r.name, std::to_string(r.raw_risk),
                      io::format_real(r.risk_index), flags_to_string(r.flags)});
  return table::render(t);
}

std::vector<RiskRow> parse_risk_table(std::string_view text) {
  auto t = table::parse(text);
  if (t.header.empty())
    throw ParseError("empty risk-index table");
  auto c_id = t.column("cwe_id");
  auto c_name = t.find_column("name");
  auto c_raw = t.column("raw_risk");
  auto c_idx = t.column("risk_index");
  auto c_flags = t.find_column("imputation_flags");
  std::vector<RiskRow> rows;
  for (const auto& row : t.rows) {
    RiskRow r;
    r.cwe_id = static_cast<int>(table::to_integer(row[c_id], "cwe_id"));
    if (c_name)
      r.name = row[*c_name];
    r.raw_risk = table::to_integer(row[c_raw], "raw_risk");
    r.risk_index = table::to_real(row[c_idx], "risk_index");
    if (c_flags)
      r.flags = flags_from_string(row[*c_flags]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::map<int, double> risk_weights(const std::vector<RiskRow>& rows) {
  std::map<int, double> w;
  for (const auto& r : rows)
    w[r.cwe_id] = r.risk_index;
  return w;
}

std::map<int, double> risk_weights(const RiskIndexMap& index) {
  std::map<int, double> w;
  for (const auto& [id, e] : index)
    w[id] = e.risk_index;
  return w;
}

ScoredCatalog build_scored_catalog(std::string_view cwe_xml, std::string_view capec_xml,
                                   const OverrideTable& overrides) {
  ScoredCatalog c;
  c.weaknesses = parse_cwe_catalog(cwe_xml);
  c.patterns = parse_capec_catalog(capec_xml);
  c.pairs = build_pairs(c.weaknesses, c.patterns, overrides);
  c.index = compute_cwe_risk_index(c.pairs.pairs);
  return c;
}

} // namespace mcprisk::catalog
