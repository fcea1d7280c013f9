// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <doctest.h>

#include "mcprisk/error.hpp"
#include "mcprisk/surfaces.hpp"
#include "test_support.hpp"

using namespace mcprisk;
using namespace mcprisk::surfaces;
using findings::ProfileMap;

namespace {

findings::RepoFindingProfile profile(std::string repo, std::map<int, int> freq) {
  findings::RepoFindingProfile p;
  p.repo_id = std::move(repo);
  p.frequencies = std::move(freq);
  for (auto [c, f] : p.frequencies)
    p.total += f;
  return p;
}

// Mapped CWEs of each surface plus two unmapped ones.
const std::vector<int> kPool{78, 89, 502, 22, 200, 732, 79, 117, 441, 306, 862, 918, 1191, 4242};

ProfileMap random_corpus(std::mt19937_64& rng, int repos) {
  ProfileMap out;
  for (int r = 0; r < repos; ++r) {
    std::map<int, int> freq;
    const int kinds = static_cast<int>(rng() % 5);
    for (int k = 0; k < kinds; ++k)
      freq[kPool[rng() % kPool.size()]] += 1 + static_cast<int>(rng() % 4);
    auto name = "r" + std::to_string(r);
    out.emplace(name, profile(name, freq));
  }
  return out;
}

scoring::RiskWeights pool_weights() {
  scoring::RiskWeights w;
  double v = 3.0;
  for (int c : kPool)
    w[c] = (v += 6.5);
  return w;
}

} // namespace

TEST_SUITE("surfaces") {

TEST_CASE("shipped surface table") {
  const auto& m = SurfaceMap::builtin();
  CHECK(m.entries().size() == 51);
  CHECK(m.members(Surface::Tool).size() == 11);
  CHECK(m.members(Surface::Resource).size() == 15);
  CHECK(m.members(Surface::Prompt).size() == 9);
  CHECK(m.members(Surface::Protocol).size() == 16);
  CHECK(map_cwe_to_surface(78) == Surface::Tool);
  CHECK(map_cwe_to_surface(22) == Surface::Resource);
  CHECK(map_cwe_to_surface(441) == Surface::Prompt);
  CHECK(map_cwe_to_surface(639) == Surface::Protocol);
  CHECK(map_cwe_to_surface(1191) == Surface::Unmapped);

  SUBCASE("data file is byte-identical to the built-in rendering") {
    auto text = testsupport::slurp(testsupport::data_file("surface_map.csv"));
    CHECK(text == m.render());
    CHECK(SurfaceMap::parse(text).entries() == m.entries());
  }
  SUBCASE("invalid tables") {
    auto kind = [](const char* text) {
      try {
        SurfaceMap::parse(text);
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::Usage;
    };
    CHECK(kind("cwe_id,surface\n22,Resource\n22,Tool\n") == ErrorKind::Config);
    CHECK(kind("cwe_id,surface\n22,Unmapped\n") == ErrorKind::Config);
    CHECK(kind("cwe_id,surface\n22,Kitchen\n") == ErrorKind::Parse);
    CHECK(kind("cwe_id,surface\n-3,Tool\n") == ErrorKind::Parse);
  }
}

TEST_CASE("shares are conserved") {
  std::mt19937_64 rng(99);
  const auto w = pool_weights();
  for (int trial = 0; trial < 100; ++trial) {
    auto corpus = random_corpus(rng, 1 + trial % 20);
    long long total = 0;
    for (const auto& [r, p] : corpus)
      total += p.total;
    if (total == 0) {
      CHECK_THROWS_AS(surface_shares(corpus, w, SurfaceMap::builtin()), Error);
      continue;
    }
    auto s = surface_shares(corpus, w, SurfaceMap::builtin());
    double fs = 0, es = 0;
    long long n = 0;
    for (Surface x : kAllSurfaces) {
      fs += s.finding_share[index(x)];
      es += s.exposure_share[index(x)];
      n += s.findings[index(x)];
    }
    CHECK(n == total);
    CHECK(fs == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(es == doctest::Approx(100.0).epsilon(1e-12));

    auto back = parse_shares_csv(render_shares_csv(s));
    for (Surface x : kAllSurfaces) {
      CHECK(back.findings[index(x)] == s.findings[index(x)]);
      CHECK(back.exposure_share[index(x)] == doctest::Approx(s.exposure_share[index(x)]).epsilon(1e-9));
    }
  }
}

TEST_CASE("shares reject CWEs without a weight") {
  ProfileMap p{{"a", profile("a", {{78, 1}})}};
  try {
    surface_shares(p, {}, SurfaceMap::builtin());
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Scoring);
  }
}

TEST_CASE("co-occurrence matches brute force") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    auto corpus = random_corpus(rng, 1 + trial % 20);
    auto m = cooccurrence(corpus, SurfaceMap::builtin());
    CHECK(m.repositories == static_cast<int>(corpus.size()));
    for (Surface a : kNamedSurfaces) {
      int support = 0;
      std::array<int, 4> both{};
      for (const auto& [r, p] : corpus) {
        bool has_a = false;
        std::array<bool, 4> has{};
        for (auto [cwe, f] : p.frequencies) {
          Surface s = map_cwe_to_surface(cwe);
          if (s == Surface::Unmapped)
            continue;
          has[index(s)] = true;
          has_a = has_a || s == a;
        }
        if (!has_a)
          continue;
        ++support;
        for (Surface b : kNamedSurfaces)
          both[index(b)] += has[index(b)];
      }
      CHECK(m.support[index(a)] == support);
      for (Surface b : kNamedSurfaces) {
        auto v = m.cell(a, b);
        if (support == 0) {
          CHECK_FALSE(v.has_value());
          continue;
        }
        REQUIRE(v.has_value());
        CHECK(*v == 100.0 * both[index(b)] / support);
      }
      if (support > 0)
        CHECK(*m.cell(a, a) == 100.0);
    }
    CHECK_FALSE(m.cell(Surface::Unmapped, Surface::Tool).has_value());

    auto back = parse_matrix_json(render_matrix_json(m));
    CHECK(back.support == m.support);
    CHECK(back.repositories == m.repositories);
    for (Surface a : kNamedSurfaces)
      for (Surface b : kNamedSurfaces)
        CHECK(back.cell(a, b) == m.cell(a, b));
  }
}

TEST_CASE("chain report") {
  ProfileMap corpus{
      {"a", profile("a", {{78, 1}, {862, 1}, {22, 1}})},
      {"b", profile("b", {{78, 2}, {862, 1}})},
      {"c", profile("c", {{441, 1}, {78, 1}})},
      {"d", profile("d", {{22, 1}})},
  };
  auto m = cooccurrence(corpus, SurfaceMap::builtin());
  CHECK(*m.cell(Surface::Tool, Surface::Protocol) == doctest::Approx(100.0 * 2 / 3));
  CHECK(*m.cell(Surface::Protocol, Surface::Tool) == 100.0);
  CHECK(*m.cell(Surface::Prompt, Surface::Tool) == 100.0);
  CHECK_FALSE(m.cell(Surface::Tool, Surface::Tool) == std::nullopt);

  auto chains = chain_report(m, 50.0);
  REQUIRE_FALSE(chains.empty());
  for (std::size_t i = 0; i < chains.size(); ++i) {
    CHECK(chains[i].from != chains[i].to);
    CHECK(chains[i].value >= 50.0);
    if (i > 0)
      CHECK(chains[i - 1].value >= chains[i].value);
  }
  bool prompt_tool = false;
  for (const auto& c : chains)
    if (c.from == Surface::Prompt && c.to == Surface::Tool) {
      prompt_tool = true;
      CHECK(c.annotation.starts_with("Chain 4"));
    }
  CHECK(prompt_tool);
  CHECK(chain_report(m, 101.0).empty());
  auto csv = render_chains_csv(chains);
  CHECK(csv.starts_with("given,present,value,annotation"));
}

} // TEST_SUITE
