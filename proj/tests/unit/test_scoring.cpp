// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include <doctest.h>

#include "mcprisk/error.hpp"
#include "mcprisk/scoring.hpp"
#include "test_support.hpp"

using namespace mcprisk;
using namespace mcprisk::scoring;
using findings::ProfileMap;
using findings::RepoFindingProfile;

namespace {

RepoFindingProfile profile(std::string repo, std::map<int, int> freq) {
  RepoFindingProfile p;
  p.repo_id = std::move(repo);
  p.frequencies = std::move(freq);
  for (auto [c, f] : p.frequencies)
    p.total += f;
  return p;
}

struct Corpus {
  ProfileMap profiles;
  RiskWeights weights;
};

Corpus random_corpus(std::mt19937_64& rng) {
  Corpus c;
  std::uniform_real_distribution<double> w(0.5, 100.0);
  for (int cwe = 1; cwe <= 30; ++cwe)
    c.weights[cwe] = w(rng);
  const int repos = 1 + static_cast<int>(rng() % 50);
  int budget = 500;
  for (int r = 0; r < repos; ++r) {
    std::map<int, int> freq;
    const int kinds = static_cast<int>(rng() % 6);
    for (int k = 0; k < kinds && budget > 0; ++k) {
      int f = 1 + static_cast<int>(rng() % std::min(20, budget));
      freq[1 + static_cast<int>(rng() % 30)] += f;
      budget -= f;
    }
    auto name = "repo" + std::to_string(r);
    c.profiles.emplace(name, profile(name, freq));
  }
  return c;
}

} // namespace

TEST_SUITE("scoring") {

TEST_CASE("bands are fixed 20-point intervals") {
  CHECK(assign_band(0.0) == Band::VeryLow);
  CHECK(assign_band(19.999) == Band::VeryLow);
  CHECK(assign_band(20.0) == Band::Low);
  CHECK(assign_band(39.999) == Band::Low);
  CHECK(assign_band(40.0) == Band::Medium);
  CHECK(assign_band(47.0) == Band::Medium);
  CHECK(assign_band(60.0) == Band::High);
  CHECK(assign_band(80.0) == Band::VeryHigh);
  CHECK(assign_band(100.0) == Band::VeryHigh);
  for (double bad : {-0.001, 100.001, std::nan("")}) {
    try {
      assign_band(bad);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Scoring);
    }
  }
  for (Band b : {Band::VeryLow, Band::Low, Band::Medium, Band::High, Band::VeryHigh, Band::Unscored})
    CHECK(band_from_string(to_string(b)) == b);
}

TEST_CASE("repository metrics on a hand example") {
  RiskWeights w{{89, 100.0}, {79, 50.0}};
  auto p = profile("r", {{89, 1}, {79, 3}});
  CHECK(repo_exposure(p, w) == doctest::Approx(250.0));
  CHECK(repo_rms(p, w) == doctest::Approx(std::sqrt((10000.0 + 3 * 2500.0) / 4)));
  CHECK(repo_overall(p, w) == doctest::Approx(std::sqrt(17500.0 / 4) * std::log10(5.0)));

  try {
    repo_exposure(profile("r", {{89, 1}, {7, 1}, {8, 2}}), w);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Scoring);
    std::string msg = e.what();
    CHECK(msg.find("CWE-7") != std::string::npos);
    CHECK(msg.find("CWE-8") != std::string::npos);
  }
}

TEST_CASE("metrics agree with a naive computation") {
  std::mt19937_64 rng(2025);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = random_corpus(rng);
    auto scores = score_repositories(c.profiles, c.weights);
    REQUIRE(scores.size() == c.profiles.size());
    for (const auto& s : scores) {
      const auto& p = c.profiles.at(s.repo_id);
      double exp = 0, sq = 0;
      long n = 0;
      for (auto [cwe, f] : p.frequencies) {
        for (int i = 0; i < f; ++i) {
          exp += c.weights.at(cwe);
          sq += c.weights.at(cwe) * c.weights.at(cwe);
          ++n;
        }
      }
      CHECK(s.findings == n);
      if (n == 0) {
        CHECK(s.band == Band::Unscored);
        continue;
      }
      const double rms = std::sqrt(sq / n);
      CHECK(std::abs(s.exposure - exp) < 1e-9);
      CHECK(std::abs(s.rms - rms) < 1e-9);
      CHECK(std::abs(s.overall - rms * std::log10(n + 1.0)) < 1e-9);
      // Quadratic mean dominates the arithmetic mean.
      CHECK(s.rms + 1e-12 >= exp / n);
      CHECK(s.normalized >= 0.0);
      CHECK(s.normalized <= 100.0);
    }
  }
}

TEST_CASE("normalization preserves ranking and ignores weight scale") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = random_corpus(rng);
    auto scores = score_repositories(c.profiles, c.weights);
    for (const auto& a : scores)
      for (const auto& b : scores) {
        if (!a.scored() || !b.scored())
          continue;
        if (a.overall < b.overall)
          CHECK(a.normalized <= b.normalized);
        if (a.normalized < b.normalized)
          CHECK(a.overall < b.overall);
      }

    RiskWeights scaled = c.weights;
    for (auto& [cwe, w] : scaled)
      w *= 3.5;
    auto again = score_repositories(c.profiles, scaled);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      CHECK(again[i].normalized == doctest::Approx(scores[i].normalized).epsilon(1e-9));
      CHECK(again[i].band == scores[i].band);
    }
  }
}

TEST_CASE("degenerate normalization") {
  RiskWeights w{{1, 10.0}};
  ProfileMap one{{"only", profile("only", {{1, 4}})}, {"empty", profile("empty", {})}};
  auto s = score_repositories(one, w);
  CHECK(s[0].repo_id == "empty");
  CHECK(s[0].band == Band::Unscored);
  CHECK(s[1].normalized == 0.0);
  CHECK(s[1].band == Band::VeryLow);

  // A single finding of weight 1 gives overall log10(2) > 0.
  ProfileMap tiny{{"t", profile("t", {{1, 1}})}};
  CHECK(score_repositories(tiny, {{1, 1.0}})[0].overall == doctest::Approx(std::log10(2.0)));
}

TEST_CASE("unweighted CWEs are dropped and counted") {
  ProfileMap p{{"a", profile("a", {{1, 2}, {2, 3}})}, {"b", profile("b", {{1, 1}})}};
  p.at("a").provenance[2].push_back({findings::Tool::CodeQL, "f", 1});
  auto removed = drop_unweighted(p, {{1, 5.0}});
  CHECK(removed.size() == 1);
  CHECK(removed.at("a") == 3);
  CHECK(p.at("a").total == 2);
  CHECK(p.at("a").frequencies.count(2) == 0);
  CHECK(p.at("a").provenance.count(2) == 0);
}

TEST_CASE("score tables") {
  std::mt19937_64 rng(5);
  auto c = random_corpus(rng);
  auto scores = score_repositories(c.profiles, c.weights);
  auto back = parse_scores_csv(render_scores_csv(scores));
  REQUIRE(back.size() == scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    CHECK(back[i].repo_id == scores[i].repo_id);
    CHECK(back[i].findings == scores[i].findings);
    CHECK(back[i].band == scores[i].band);
    CHECK(back[i].normalized == doctest::Approx(scores[i].normalized).epsilon(1e-9));
  }
  CHECK(render_scores_csv(back) == render_scores_csv(scores));
  CHECK(render_scores_json(scores).find("\"ln_overall\"") != std::string::npos);

  std::vector<RepoScore> s(3);
  s[0].band = Band::Low;
  s[1].band = Band::Low;
  s[2].band = Band::Unscored;
  auto h = band_histogram(s);
  REQUIRE(h.size() == 1);
  CHECK(h[0] == std::pair<Band, int>{Band::Low, 2});
}

} // TEST_SUITE
