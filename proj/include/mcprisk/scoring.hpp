// SPDX-License-Identifier: Apache-2.0
//
// Repository-level risk from CWE finding frequencies f(c) and weights w(c):
//
//   exposure   = sum_c f(c) w(c)
//   rms        = sqrt( sum_c f(c) w(c)^2 / N ),   N = sum_c f(c)
//   overall    = rms * log10(N + 1)
//   normalized = 100 (ln overall - min) / (max - min) over the scored corpus
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcprisk/findings.hpp"

namespace mcprisk::scoring {

using RiskWeights = std::map<int, double>;

enum class Band { VeryLow, Low, Medium, High, VeryHigh, Unscored };

std::string_view to_string(Band band);
Band band_from_string(std::string_view text);

/// Half-open 20-point bands, [80, 100] closed at the top.
Band assign_band(double normalized);

/// Raise Error{Scoring} when a profile CWE has no weight, listing every such CWE.
double repo_exposure(const findings::RepoFindingProfile& profile, const RiskWeights& weights);
double repo_rms(const findings::RepoFindingProfile& profile, const RiskWeights& weights);
double repo_overall(const findings::RepoFindingProfile& profile, const RiskWeights& weights);

struct RepoScore {
  std::string repo_id;
  int findings = 0;
  double exposure = 0.0;
  double rms = 0.0;
  double overall = 0.0;
  double ln_overall = 0.0;
  double normalized = 0.0;
  Band band = Band::Unscored;

  bool scored() const { return band != Band::Unscored; }
};

/// Ecosystem min-max over ln(overall) for every scored entry. A degenerate
/// range (one repository, or all equal) maps everything to 0.
void normalize_scores(std::vector<RepoScore>& scores);

/// Per-repository metrics followed by normalization. Repositories with no
/// findings are returned with band Unscored.
std::vector<RepoScore> score_repositories(const findings::ProfileMap& profiles,
                                          const RiskWeights& weights);

/// Drops CWEs that have no weight; returns the number of findings removed per
/// repository (only nonzero entries).
std::map<std::string, int> drop_unweighted(findings::ProfileMap& profiles,
                                           const RiskWeights& weights);

std::string render_scores_csv(const std::vector<RepoScore>& scores);
std::string render_scores_json(const std::vector<RepoScore>& scores);
std::vector<RepoScore> parse_scores_csv(std::string_view text);

/// Bands with a nonzero count, in band order, Unscored excluded.
std::vector<std::pair<Band, int>> band_histogram(const std::vector<RepoScore>& scores);

} // namespace mcprisk::scoring
