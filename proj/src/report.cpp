// SPDX-License-Identifier: Apache-2.0
#include "mcprisk/report.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "mcprisk/error.hpp"
#include "mcprisk/io.hpp"
#include "mcprisk/table.hpp"

namespace mcprisk::report {

using nlohmann::ordered_json;

Format format_from_string(std::string_view text) {
  if (text == "delimited" || text == "csv")
    return Format::Delimited;
  if (text == "json")
    return Format::Json;
  throw Error(ErrorKind::Usage, fmt::format("unknown report format '{}' (expected delimited or json)", text));
}

namespace {

/// Tables are built once and written either as CSV or as an array of records.
/// Numeric columns are emitted as JSON numbers.
struct ReportTable {
  table::Table t;
  std::vector<bool> numeric;
};

std::string to_json(const ReportTable& r) {
  ordered_json doc = ordered_json::array();
  for (const auto& row : r.t.rows) {
    ordered_json rec = ordered_json::object();
    for (std::size_t i = 0; i < r.t.header.size(); ++i) {
      if (r.numeric[i] && !row[i].empty())
        rec[r.t.header[i]] = table::to_real(row[i], r.t.header[i]);
      else if (r.numeric[i])
        rec[r.t.header[i]] = nullptr;
      else
        rec[r.t.header[i]] = row[i];
    }
    doc.push_back(std::move(rec));
  }
  return doc.dump(2) + "\n";
}

ReportTable cwe_frequency(const ReportInputs& in) {
  std::map<int, std::pair<long long, int>> freq; // cwe -> (findings, repositories)
  for (const auto& [repo, p] : in.profiles)
    for (auto [cwe, f] : p.frequencies) {
      freq[cwe].first += f;
      ++freq[cwe].second;
    }
  std::map<int, const catalog::RiskRow*> risk;
  for (const auto& r : in.risk)
    risk.emplace(r.cwe_id, &r);

  std::vector<std::pair<int, std::pair<long long, int>>> rows(freq.begin(), freq.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second.first > b.second.first; });
  ReportTable r;
  r.t.header = {"cwe_id", "name", "surface", "frequency", "repositories", "risk_index"};
  r.numeric = {true, false, false, true, true, true};
  for (const auto& [cwe, f] : rows) {
    auto it = risk.find(cwe);
    r.t.rows.push_back({std::to_string(cwe), it == risk.end() ? "" : it->second->name,
                        std::string(surfaces::to_string(in.surface_map.lookup(cwe))), std::to_string(f.first),
                        std::to_string(f.second), it == risk.end() ? "" : io::format_real(it->second->risk_index)});
  }
  return r;
}

ReportTable repo_scatter(const ReportInputs& in) {
  ReportTable r;
  r.t.header = {"repo_id", "N_r", "rms", "normalized", "band"};
  r.numeric = {false, true, true, true, false};
  for (const auto& s : in.scores)
    if (s.scored())
      r.t.rows.push_back({s.repo_id, std::to_string(s.findings), io::format_real(s.rms),
                          io::format_real(s.normalized), std::string(scoring::to_string(s.band))});
  return r;
}

ReportTable shares(const ReportInputs& in) {
  ReportTable r;
  r.t.header = {"surface", "finding_share", "exposure_share"};
  r.numeric = {false, true, true};
  for (auto s : surfaces::kAllSurfaces)
    r.t.rows.push_back({std::string(surfaces::to_string(s)), io::format_real(in.shares.finding_share[index(s)]),
                        io::format_real(in.shares.exposure_share[index(s)])});
  return r;
}

ReportTable bands(const ReportInputs& in) {
  ReportTable r;
  r.t.header = {"band", "count"};
  r.numeric = {false, true};
  for (auto [band, n] : scoring::band_histogram(in.scores))
    r.t.rows.push_back({std::string(scoring::to_string(band)), std::to_string(n)});
  return r;
}

ReportTable matrix(const ReportInputs& in) {
  ReportTable r;
  r.t.header = {"given"};
  r.numeric = {false};
  for (auto b : surfaces::kNamedSurfaces) {
    r.t.header.emplace_back(surfaces::to_string(b));
    r.numeric.push_back(true);
  }
  r.t.header.emplace_back("support");
  r.numeric.push_back(true);
  for (auto a : surfaces::kNamedSurfaces) {
    table::Row row{std::string(surfaces::to_string(a))};
    for (auto b : surfaces::kNamedSurfaces) {
      auto v = in.matrix.cell(a, b);
      row.push_back(v ? io::format_real(*v) : std::string());
    }
    row.push_back(std::to_string(in.matrix.support[index(a)]));
    r.t.rows.push_back(std::move(row));
  }
  return r;
}

} // namespace

std::vector<std::filesystem::path> emit_report(const ReportInputs& inputs, Format format,
                                               const std::filesystem::path& dir) {
  if (std::none_of(inputs.scores.begin(), inputs.scores.end(), [](const auto& s) { return s.scored(); }))
    throw Error(ErrorKind::Usage, "no scored repositories");
  const std::pair<std::string_view, ReportTable> tables[] = {
      {kCweFrequency, cwe_frequency(inputs)}, {kRepoScatter, repo_scatter(inputs)},
      {kSurfaceShares, shares(inputs)},       {kBandDistribution, bands(inputs)},
      {kCooccurrence, matrix(inputs)},
  };
  std::vector<std::filesystem::path> out;
  for (const auto& [stem, t] : tables) {
    auto path = dir / fmt::format("{}.{}", stem, format == Format::Json ? "json" : "csv");
    io::write_file(path, format == Format::Json ? to_json(t) : table::render(t.t));
    out.push_back(std::move(path));
  }
  return out;
}

} // namespace mcprisk::report
