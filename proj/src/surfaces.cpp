// SPDX-License-Identifier: Apache-2.0
#include "mcprisk/surfaces.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>
#include <json.hpp>

#include "mcprisk/error.hpp"
#include "mcprisk/io.hpp"
#include "mcprisk/table.hpp"

namespace mcprisk::surfaces {

std::string_view to_string(Surface surface) {
  switch (surface) {
  case Surface::Tool: return "Tool";
  case Surface::Resource: return "Resource";
  case Surface::Prompt: return "Prompt";
  case Surface::Protocol: return "Protocol";
  case Surface::Unmapped: return "Unmapped";
  }
  return "";
}

Surface surface_from_string(std::string_view text) {
  for (Surface s : kAllSurfaces) {
    auto name = to_string(s);
    if (name.size() == text.size() &&
        std::equal(name.begin(), name.end(), text.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
        }))
      return s;
  }
  throw ParseError(fmt::format("unknown threat surface '{}'", text));
}

SurfaceMap::SurfaceMap(std::map<int, Surface> entries) : entries_(std::move(entries)) {}

const SurfaceMap& SurfaceMap::builtin() {
  static const SurfaceMap map = [] {
    std::map<int, Surface> e;
    for (int c : {77, 78, 88, 89, 94, 95, 99, 434, 502, 829, 1321})
      e[c] = Surface::Tool;
    for (int c : {22, 23, 36, 73, 200, 209, 212, 276, 312, 315, 359, 377, 497, 532, 732})
      e[c] = Surface::Resource;
    for (int c : {20, 74, 79, 116, 117, 185, 186, 441, 601})
      e[c] = Surface::Prompt;
    for (int c : {284, 287, 295, 306, 327, 328, 352, 400, 489, 639, 770, 862, 863, 916, 918, 1333})
      e[c] = Surface::Protocol;
    return SurfaceMap(std::move(e));
  }();
  return map;
}

SurfaceMap SurfaceMap::parse(std::string_view text) {
  auto t = table::parse(text);
  if (t.header.empty())
    throw ParseError("surface map is empty");
  const auto c_id = t.column("cwe_id"), c_s = t.column("surface");
  std::map<int, Surface> e;
  for (const auto& row : t.rows) {
    int cwe = static_cast<int>(table::to_integer(row[c_id], "cwe_id"));
    if (cwe <= 0)
      throw ParseError(fmt::format("surface map: invalid CWE id {}", cwe));
    Surface s = surface_from_string(row[c_s]);
    if (s == Surface::Unmapped)
      throw Error(ErrorKind::Config, fmt::format("surface map: CWE-{} assigned to Unmapped", cwe));
    if (!e.emplace(cwe, s).second)
      throw Error(ErrorKind::Config, fmt::format("surface map: CWE-{} listed twice", cwe));
  }
  return SurfaceMap(std::move(e));
}

Surface SurfaceMap::lookup(int cwe_id) const {
  auto it = entries_.find(cwe_id);
  return it == entries_.end() ? Surface::Unmapped : it->second;
}

std::vector<int> SurfaceMap::members(Surface surface) const {
  std::vector<int> out;
  for (auto [cwe, s] : entries_)
    if (s == surface)
      out.push_back(cwe);
  return out;
}

std::string SurfaceMap::render() const {
  table::Table t;
  t.header = {"cwe_id", "surface"};
  for (Surface s : kNamedSurfaces)
    for (int cwe : members(s))
      t.rows.push_back({std::to_string(cwe), std::string(to_string(s))});
  return table::render(t);
}

Surface map_cwe_to_surface(int cwe_id) { return SurfaceMap::builtin().lookup(cwe_id); }

// ---------------------------------------------------------------------------

SurfaceShares surface_shares(const findings::ProfileMap& profiles, const scoring::RiskWeights& weights,
                             const SurfaceMap& map) {
  SurfaceShares s;
  long long total = 0;
  double exposure = 0.0;
  for (const auto& [repo, p] : profiles) {
    for (auto [cwe, f] : p.frequencies) {
      auto w = weights.find(cwe);
      if (w == weights.end())
        throw Error(ErrorKind::Scoring, fmt::format("repository {}: no Risk Index for CWE-{}", repo, cwe));
      const auto i = index(map.lookup(cwe));
      s.findings[i] += f;
      s.exposure[i] += f * w->second;
      total += f;
      exposure += f * w->second;
    }
  }
  if (total == 0)
    throw Error(ErrorKind::Scoring, "surface shares undefined: corpus has no findings");
  for (std::size_t i = 0; i < s.findings.size(); ++i) {
    s.finding_share[i] = 100.0 * static_cast<double>(s.findings[i]) / static_cast<double>(total);
    s.exposure_share[i] = exposure > 0.0 ? 100.0 * s.exposure[i] / exposure : 0.0;
  }
  return s;
}

std::optional<double> CooccurrenceMatrix::cell(Surface a, Surface b) const {
  if (a == Surface::Unmapped || b == Surface::Unmapped)
    return std::nullopt;
  return cells[index(a)][index(b)];
}

CooccurrenceMatrix cooccurrence(const findings::ProfileMap& profiles, const SurfaceMap& map) {
  CooccurrenceMatrix m;
  std::array<std::array<int, 4>, 4> both{};
  for (const auto& [repo, p] : profiles) {
    std::array<bool, 4> has{};
    for (auto [cwe, f] : p.frequencies) {
      Surface s = map.lookup(cwe);
      if (s != Surface::Unmapped && f > 0)
        has[index(s)] = true;
    }
    ++m.repositories;
    for (std::size_t a = 0; a < 4; ++a) {
      if (!has[a])
        continue;
      ++m.support[a];
      for (std::size_t b = 0; b < 4; ++b)
        if (has[b])
          ++both[a][b];
    }
  }
  for (std::size_t a = 0; a < 4; ++a)
    if (m.support[a] > 0)
      for (std::size_t b = 0; b < 4; ++b)
        m.cells[a][b] = 100.0 * both[a][b] / m.support[a];
  return m;
}

namespace {

std::string chain_annotation(Surface a, Surface b) {
  using enum Surface;
  if (a == Tool && (b == Protocol || b == Resource))
    return "Chain 1: weak access control on the server opens a path to tool abuse";
  if ((a == Resource && b == Protocol) || (a == Protocol && b == Resource))
    return "Chain 2: exposed data reachable through protocol-level gaps";
  if (a == Prompt && (b == Resource || b == Protocol))
    return "Chain 3: injected instructions steer the server into leaking or misusing access";
  if (a == Prompt && b == Tool)
    return "Chain 4: injected instructions drive dangerous tool execution";
  return {};
}

} // namespace

std::vector<ChainLink> chain_report(const CooccurrenceMatrix& matrix, double threshold) {
  std::vector<ChainLink> out;
  for (Surface a : kNamedSurfaces)
    for (Surface b : kNamedSurfaces) {
      if (a == b)
        continue;
      auto v = matrix.cell(a, b);
      if (v && *v >= threshold)
        out.push_back({a, b, *v, chain_annotation(a, b)});
    }
  std::stable_sort(out.begin(), out.end(), [](const ChainLink& x, const ChainLink& y) { return x.value > y.value; });
  return out;
}

// ---------------------------------------------------------------------------

std::string render_shares_csv(const SurfaceShares& shares) {
  table::Table t;
  t.header = {"surface", "findings", "finding_share", "exposure", "exposure_share"};
  for (Surface s : kAllSurfaces) {
    auto i = index(s);
    t.rows.push_back({std::string(to_string(s)), std::to_string(shares.findings[i]),
                      io::format_real(shares.finding_share[i]), io::format_real(shares.exposure[i]),
                      io::format_real(shares.exposure_share[i])});
  }
  return table::render(t);
}

SurfaceShares parse_shares_csv(std::string_view text) {
  auto t = table::parse(text);
  if (t.header.empty())
    throw ParseError("empty shares table");
  const auto c_s = t.column("surface"), c_f = t.column("findings"), c_fs = t.column("finding_share"),
             c_e = t.column("exposure"), c_es = t.column("exposure_share");
  SurfaceShares s;
  for (const auto& row : t.rows) {
    auto i = index(surface_from_string(row[c_s]));
    s.findings[i] = table::to_integer(row[c_f], "findings");
    s.finding_share[i] = table::to_real(row[c_fs], "finding_share");
    s.exposure[i] = table::to_real(row[c_e], "exposure");
    s.exposure_share[i] = table::to_real(row[c_es], "exposure_share");
  }
  return s;
}

std::string render_matrix_csv(const CooccurrenceMatrix& m) {
  table::Table t;
  t.header = {"given"};
  for (Surface b : kNamedSurfaces)
    t.header.emplace_back(to_string(b));
  t.header.emplace_back("support");
  for (Surface a : kNamedSurfaces) {
    table::Row row{std::string(to_string(a))};
    for (Surface b : kNamedSurfaces) {
      auto v = m.cell(a, b);
      row.push_back(v ? io::format_real(*v) : std::string());
    }
    row.push_back(std::to_string(m.support[index(a)]));
    t.rows.push_back(std::move(row));
  }
  return table::render(t);
}

std::string render_matrix_json(const CooccurrenceMatrix& m) {
  nlohmann::ordered_json j;
  j["repositories"] = m.repositories;
  auto& support = j["support"] = nlohmann::ordered_json::object();
  for (Surface a : kNamedSurfaces)
    support[std::string(to_string(a))] = m.support[index(a)];
  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (Surface a : kNamedSurfaces)
    for (Surface b : kNamedSurfaces) {
      nlohmann::ordered_json c{{"given", to_string(a)}, {"present", to_string(b)}};
      auto v = m.cell(a, b);
      if (v)
        c["value"] = *v;
      else
        c["value"] = nullptr;
      cells.push_back(std::move(c));
    }
  return j.dump(2) + "\n";
}

CooccurrenceMatrix parse_matrix_json(std::string_view text) {
  CooccurrenceMatrix m;
  try {
    auto j = nlohmann::json::parse(text);
    m.repositories = j.at("repositories").get<int>();
    for (Surface a : kNamedSurfaces)
      m.support[index(a)] = j.at("support").at(std::string(to_string(a))).get<int>();
    for (const auto& c : j.at("cells")) {
      auto a = surface_from_string(c.at("given").get<std::string>());
      auto b = surface_from_string(c.at("present").get<std::string>());
      if (a == Surface::Unmapped || b == Surface::Unmapped)
        throw ParseError("co-occurrence matrix: Unmapped is not a matrix axis");
      if (!c.at("value").is_null())
        m.cells[index(a)][index(b)] = c.at("value").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("co-occurrence matrix: {}", e.what()));
  }
  return m;
}

std::string render_chains_csv(const std::vector<ChainLink>& chains) {
  table::Table t;
  t.header = {"given", "present", "value", "annotation"};
  for (const auto& c : chains)
    t.rows.push_back({std::string(to_string(c.from)), std::string(to_string(c.to)), io::format_real(c.value),
                      c.annotation});
  return table::render(t);
}

} // namespace mcprisk::surfaces
