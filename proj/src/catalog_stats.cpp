// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "mcprisk/catalog.hpp"
#include "mcprisk/io.hpp"

namespace mcprisk::catalog {

Distribution distribution_of(const std::vector<int>& values) {
  Distribution d;
  if (values.empty())
    return d;
  std::vector<int> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sum = 0.0;
  for (int v : sorted) {
    sum += v;
    ++d.histogram[v];
  }
  d.mean = sum / n;
  const std::size_t mid = sorted.size() / 2;
  d.median = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
  double ss = 0.0;
  for (int v : sorted)
    ss += (v - d.mean) * (v - d.mean);
  d.stddev = std::sqrt(ss / n);
  d.max = sorted.back();
  return d;
}

double LabelCounts::missing_pct(std::size_t total) const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(missing) / static_cast<double>(total);
}

namespace {

template <typename T>
void tally(LabelCounts& counts, const std::optional<T>& v) {
  if (v)
    ++counts.by_label[std::string(label(*v))];
  else
    ++counts.missing;
}

nlohmann::ordered_json to_json(const Distribution& d) {
  nlohmann::ordered_json j;
  j["mean"] = d.mean;
  j["median"] = d.median;
  j["stddev"] = d.stddev;
  j["max"] = d.max;
  auto& h = j["histogram"] = nlohmann::ordered_json::array();
  for (auto [value, count] : d.histogram)
    h.push_back({{"value", value}, {"count", count}});
  return j;
}

nlohmann::ordered_json to_json(const LabelCounts& c, double pct) {
  nlohmann::ordered_json j;
  j["missing"] = c.missing;
  j["missing_pct"] = pct;
  j["labels"] = c.by_label;
  return j;
}

} // namespace

CatalogStats catalog_stats(const WeaknessCatalog& weaknesses, const AttackPatternCatalog& patterns,
                           std::size_t top_k) {
  CatalogStats s;
  s.cwe_version = weaknesses.version;
  s.capec_version = patterns.version;
  s.software_view_only = weaknesses.has_software_view;

  const auto scope = weaknesses.software_weaknesses();
  s.weakness_count = scope.size();
  s.pattern_count = patterns.patterns.size();

  std::vector<int> mi, cc, impacts;
  std::map<std::string, std::size_t> impact_counts;
  for (const WeaknessRecord* w : scope) {
    tally(s.likelihood_of_exploit, w->likelihood_of_exploit);
    mi.push_back(static_cast<int>(w->mi_count()));
    cc.push_back(static_cast<int>(w->cc_count()));
    impacts.push_back(static_cast<int>(w->impact_label_count()));
    for (const auto& c : w->consequences)
      for (const auto& i : c.impacts)
        ++impact_counts[i];
  }
  for (const auto& p : patterns.patterns) {
    tally(s.likelihood_of_attack, p.likelihood_of_attack);
    tally(s.typical_severity, p.typical_severity);
  }
  s.le_missing_pct = s.likelihood_of_exploit.missing_pct(s.weakness_count);
  s.la_missing_pct = s.likelihood_of_attack.missing_pct(s.pattern_count);
  s.ts_missing_pct = s.typical_severity.missing_pct(s.pattern_count);

  s.modes_of_introduction = distribution_of(mi);
  s.consequence_entries = distribution_of(cc);
  s.impact_labels = distribution_of(impacts);
  s.impact_label_total = std::accumulate(impacts.begin(), impacts.end(), std::size_t{0});
  s.distinct_impact_labels = impact_counts.size();

  s.top_impacts.assign(impact_counts.begin(), impact_counts.end());
  std::stable_sort(s.top_impacts.begin(), s.top_impacts.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (s.top_impacts.size() > top_k)
    s.top_impacts.resize(top_k);
  return s;
}

std::string render_stats_json(const CatalogStats& s) {
  nlohmann::ordered_json j;
  j["cwe_version"] = s.cwe_version;
  j["capec_version"] = s.capec_version;
  j["software_view_only"] = s.software_view_only;
  j["weakness_count"] = s.weakness_count;
  j["pattern_count"] = s.pattern_count;
  j["likelihood_of_exploit"] = to_json(s.likelihood_of_exploit, s.le_missing_pct);
  j["likelihood_of_attack"] = to_json(s.likelihood_of_attack, s.la_missing_pct);
  j["typical_severity"] = to_json(s.typical_severity, s.ts_missing_pct);
  j["modes_of_introduction"] = to_json(s.modes_of_introduction);
  j["consequence_entries"] = to_json(s.consequence_entries);
  j["impact_labels"] = to_json(s.impact_labels);
  j["impact_label_total"] = s.impact_label_total;
  j["distinct_impact_labels"] = s.distinct_impact_labels;
  auto& top = j["top_impacts"] = nlohmann::ordered_json::array();
  for (const auto& [label, count] : s.top_impacts)
    top.push_back({{"label", label}, {"count", count}});
  return j.dump(2) + "\n";
}

} // namespace mcprisk::catalog
