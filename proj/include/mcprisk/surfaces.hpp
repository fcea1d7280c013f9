// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcprisk/findings.hpp"
#include "mcprisk/scoring.hpp"

namespace mcprisk::surfaces {

enum class Surface { Tool, Resource, Prompt, Protocol, Unmapped };

constexpr std::array<Surface, 4> kNamedSurfaces{Surface::Tool, Surface::Resource,
                                                Surface::Prompt, Surface::Protocol};
constexpr std::array<Surface, 5> kAllSurfaces{Surface::Tool, Surface::Resource, Surface::Prompt,
                                              Surface::Protocol, Surface::Unmapped};

std::string_view to_string(Surface surface);
Surface surface_from_string(std::string_view text);
constexpr std::size_t index(Surface s) { return static_cast<std::size_t>(s); }

class SurfaceMap {
public:
  SurfaceMap() = default;
  explicit SurfaceMap(std::map<int, Surface> entries);

  /// The shipped MCP threat-surface table (51 CWEs).
  static const SurfaceMap& builtin();
  /// Two-column (cwe_id, surface) delimited text.
  static SurfaceMap parse(std::string_view text);

  Surface lookup(int cwe_id) const;
  const std::map<int, Surface>& entries() const { return entries_; }
  std::vector<int> members(Surface surface) const;
  std::string render() const;

private:
  std::map<int, Surface> entries_;
};

Surface map_cwe_to_surface(int cwe_id);

struct SurfaceShares {
  std::array<long long, 5> findings{};
  std::array<double, 5> exposure{};
  std::array<double, 5> finding_share{}; // percent
  std::array<double, 5> exposure_share{};
};

/// Corpus-wide shares. Raises Error{Scoring} on a corpus with no findings.
SurfaceShares surface_shares(const findings::ProfileMap& profiles,
                             const scoring::RiskWeights& weights, const SurfaceMap& map);

struct CooccurrenceMatrix {
  /// cells[a][b] = P(b | a) in percent; absent when support[a] == 0.
  std::array<std::array<std::optional<double>, 4>, 4> cells{};
  std::array<int, 4> support{};
  int repositories = 0;

  std::optional<double> cell(Surface a, Surface b) const;
};

CooccurrenceMatrix cooccurrence(const findings::ProfileMap& profiles, const SurfaceMap& map);

struct ChainLink {
  Surface from = Surface::Tool;
  Surface to = Surface::Tool;
  double value = 0.0;
  std::string annotation; // empty when the pair is not one of the known chains
};

/// Off-diagonal cells >= threshold, descending by value.
std::vector<ChainLink> chain_report(const CooccurrenceMatrix& matrix, double threshold);

std::string render_shares_csv(const SurfaceShares& shares);
SurfaceShares parse_shares_csv(std::string_view text);
std::string render_matrix_csv(const CooccurrenceMatrix& matrix);
std::string render_matrix_json(const CooccurrenceMatrix& matrix);
CooccurrenceMatrix parse_matrix_json(std::string_view text);
std::string render_chains_csv(const std::vector<ChainLink>& chains);

} // namespace mcprisk::surfaces
