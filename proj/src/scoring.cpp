// SPDX-License-Identifier: Apache-2.0
#include "mcprisk/scoring.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "mcprisk/error.hpp"
#include "mcprisk/io.hpp"
#include "mcprisk/table.hpp"

namespace mcprisk::scoring {

std::string_view to_string(Band band) {
  switch (band) {
  case Band::VeryLow: return "VeryLow";
  case Band::Low: return "Low";
  case Band::Medium: return "Medium";
  case Band::High: return "High";
  case Band::VeryHigh: return "VeryHigh";
  case Band::Unscored: return "Unscored";
  }
  return "";
}

Band band_from_string(std::string_view text) {
  for (Band b : {Band::VeryLow, Band::Low, Band::Medium, Band::High, Band::VeryHigh, Band::Unscored})
    if (to_string(b) == text)
      return b;
  throw ParseError(fmt::format("unknown risk band '{}'", text));
}

Band assign_band(double normalized) {
  if (!(normalized >= 0.0 && normalized <= 100.0))
    throw Error(ErrorKind::Scoring, fmt::format("normalized score {} outside [0, 100]", normalized));
  if (normalized < 20.0)
    return Band::VeryLow;
  if (normalized < 40.0)
    return Band::Low;
  if (normalized < 60.0)
    return Band::Medium;
  if (normalized < 80.0)
    return Band::High;
  return Band::VeryHigh;
}

namespace {

struct Sums {
  double fw = 0.0;
  double fw2 = 0.0;
  long long n = 0;
};

Sums weighted_sums(const findings::RepoFindingProfile& profile, const RiskWeights& weights) {
  Sums s;
  std::vector<int> missing;
  for (auto [cwe, f] : profile.frequencies) {
    auto it = weights.find(cwe);
    if (it == weights.end()) {
      missing.push_back(cwe);
      continue;
    }
    s.fw += f * it->second;
    s.fw2 += f * it->second * it->second;
    s.n += f;
  }
  if (!missing.empty()) {
    std::vector<std::string> names;
    for (int c : missing)
      names.push_back(fmt::format("CWE-{}", c));
    throw Error(ErrorKind::Scoring, fmt::format("repository {}: no Risk Index for {}", profile.repo_id,
                                                fmt::join(names, ", ")));
  }
  return s;
}

Sums require_findings(const findings::RepoFindingProfile& profile, const RiskWeights& weights) {
  Sums s = weighted_sums(profile, weights);
  if (s.n == 0)
    throw Error(ErrorKind::Scoring, fmt::format("repository {} has no findings; score undefined", profile.repo_id));
  return s;
}

} // namespace

double repo_exposure(const findings::RepoFindingProfile& profile, const RiskWeights& weights) {
  return weighted_sums(profile, weights).fw;
}

double repo_rms(const findings::RepoFindingProfile& profile, const RiskWeights& weights) {
  Sums s = require_findings(profile, weights);
  return std::sqrt(s.fw2 / static_cast<double>(s.n));
}

double repo_overall(const findings::RepoFindingProfile& profile, const RiskWeights& weights) {
  Sums s = require_findings(profile, weights);
  return std::sqrt(s.fw2 / static_cast<double>(s.n)) * std::log10(static_cast<double>(s.n) + 1.0);
}

void normalize_scores(std::vector<RepoScore>& scores) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (auto& s : scores) {
    if (s.findings == 0)
      continue;
    if (!(s.overall > 0.0))
      throw Error(ErrorKind::Scoring, fmt::format("repository {}: overall score {} is not positive", s.repo_id, s.overall));
    s.ln_overall = std::log(s.overall);
    lo = any ? std::min(lo, s.ln_overall) : s.ln_overall;
    hi = any ? std::max(hi, s.ln_overall) : s.ln_overall;
    any = true;
  }
  const double range = hi - lo;
  for (auto& s : scores) {
    if (s.findings == 0) {
      s.band = Band::Unscored;
      continue;
    }
    s.normalized = range > 0.0 ? std::clamp(100.0 * (s.ln_overall - lo) / range, 0.0, 100.0) : 0.0;
    s.band = assign_band(s.normalized);
  }
}

std::vector<RepoScore> score_repositories(const findings::ProfileMap& profiles, const RiskWeights& weights) {
  std::vector<RepoScore> out;
  for (const auto& [repo, p] : profiles) {
    RepoScore s;
    s.repo_id = repo;
    Sums sums = weighted_sums(p, weights);
    s.findings = static_cast<int>(sums.n);
    s.exposure = sums.fw;
    if (sums.n > 0) {
      s.rms = std::sqrt(sums.fw2 / static_cast<double>(sums.n));
      s.overall = s.rms * std::log10(static_cast<double>(sums.n) + 1.0);
    }
    out.push_back(std::move(s));
  }
  normalize_scores(out);
  return out;
}

std::map<std::string, int> drop_unweighted(findings::ProfileMap& profiles, const RiskWeights& weights) {
  std::map<std::string, int> removed;
  for (auto& [repo, p] : profiles) {
    for (auto it = p.frequencies.begin(); it != p.frequencies.end();) {
      if (weights.contains(it->first)) {
        ++it;
        continue;
      }
      removed[repo] += it->second;
      p.total -= it->second;
      p.provenance.erase(it->first);
      it = p.frequencies.erase(it);
    }
  }
  return removed;
}

std::string render_scores_csv(const std::vector<RepoScore>& scores) {
  table::Table t;
  t.header = {"repo_id", "N_r", "exposure", "rms", "overall", "normalized", "band"};
  for (const auto& s : scores)
    t.rows.push_back({s.repo_id, std::to_string(s.findings), io::format_real(s.exposure), io::format_real(s.rms),
                      io::format_real(s.overall), io::format_real(s.normalized), std::string(to_string(s.band))});
  return table::render(t);
}

std::string render_scores_json(const std::vector<RepoScore>& scores) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& s : scores) {
    nlohmann::ordered_json j;
    j["repo_id"] = s.repo_id;
    j["N_r"] = s.findings;
    j["exposure"] = s.exposure;
    j["rms"] = s.rms;
    j["overall"] = s.overall;
    if (s.scored())
      j["ln_overall"] = s.ln_overall;
    else
      j["ln_overall"] = nullptr;
    j["normalized"] = s.normalized;
    j["band"] = to_string(s.band);
    doc.push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::vector<RepoScore> parse_scores_csv(std::string_view text) {
  auto t = table::parse(text);
  if (t.header.empty())
    throw ParseError("empty score table");
  const auto c_repo = t.column("repo_id"), c_n = t.column("N_r"), c_exp = t.column("exposure"),
             c_rms = t.column("rms"), c_ov = t.column("overall"), c_norm = t.column("normalized"),
             c_band = t.column("band");
  std::vector<RepoScore> out;
  for (const auto& row : t.rows) {
    RepoScore s;
    s.repo_id = row[c_repo];
    s.findings = static_cast<int>(table::to_integer(row[c_n], "N_r"));
    s.exposure = table::to_real(row[c_exp], "exposure");
    s.rms = table::to_real(row[c_rms], "rms");
    s.overall = table::to_real(row[c_ov], "overall");
    s.normalized = table::to_real(row[c_norm], "normalized");
    s.band = band_from_string(row[c_band]);
    if (s.overall > 0.0)
      s.ln_overall = std::log(s.overall);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::pair<Band, int>> band_histogram(const std::vector<RepoScore>& scores) {
  std::map<Band, int> counts;
  for (const auto& s : scores)
    if (s.scored())
      ++counts[s.band];
  return {counts.begin(), counts.end()};
}

} // namespace mcprisk::scoring
