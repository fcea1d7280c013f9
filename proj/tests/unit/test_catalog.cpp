// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>

#include <doctest.h>
#include <json.hpp>

#include "mcprisk/catalog.hpp"
#include "mcprisk/error.hpp"
#include "mcprisk/io.hpp"
#include "test_support.hpp"

using namespace mcprisk;
using namespace mcprisk::catalog;
using testsupport::fixture;
using testsupport::slurp;

namespace {

const WeaknessCatalog& fixture_cwe() {
  static const WeaknessCatalog c = parse_cwe_catalog(slurp(fixture("catalog/cwe_fixture.xml")));
  return c;
}

const AttackPatternCatalog& fixture_capec() {
  static const AttackPatternCatalog c = parse_capec_catalog(slurp(fixture("catalog/capec_fixture.xml")));
  return c;
}

const CweCapecPair* find_pair(const PairSet& set, int cwe, int capec) {
  for (const auto& p : set.pairs)
    if (p.cwe_id == cwe && p.capec_id == capec)
      return &p;
  return nullptr;
}

const Discard* find_discard(const PairSet& set, int cwe, int capec) {
  for (const auto& d : set.discards)
    if (d.cwe_id == cwe && d.capec_id == capec)
      return &d;
  return nullptr;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Usage;
}

} // namespace

TEST_SUITE("catalog") {

TEST_CASE("fixture catalogs parse with their attributes") {
  const auto& w = fixture_cwe();
  const auto& p = fixture_capec();
  CHECK(w.version == "fixture-1.0");
  CHECK(p.version == "fixture-1.0");
  CHECK(w.weaknesses.size() == 23);
  CHECK(p.patterns.size() == 25);
  CHECK(w.has_software_view);
  CHECK(w.software_weaknesses().size() == 22);
  REQUIRE(w.find(1191) != nullptr);
  CHECK_FALSE(w.find(1191)->software_view);

  const auto* sqli = w.find(89);
  REQUIRE(sqli != nullptr);
  CHECK(sqli->name == "SQL Injection");
  CHECK(sqli->likelihood_of_exploit == Likelihood::High);
  CHECK(sqli->mi_count() == 2);
  CHECK(sqli->cc_count() == 4);
  CHECK(sqli->impact_label_count() == 4);
  CHECK(sqli->related_capec_ids == std::vector<int>{66, 7, 9999});

  const auto* xss = p.find(63);
  REQUIRE(xss != nullptr);
  CHECK(xss->likelihood_of_attack == Likelihood::High);
  CHECK(xss->typical_severity == Severity::VeryHigh);
  CHECK(p.find(500)->deprecated());
  CHECK_FALSE(p.find(63)->deprecated());
  CHECK(w.find(424242) == nullptr);
}

TEST_CASE("ordinal labels") {
  CHECK(value(Likelihood::Low) == 1);
  CHECK(value(Likelihood::High) == 3);
  CHECK(value(Severity::VeryLow) == 1);
  CHECK(value(Severity::VeryHigh) == 5);
  CHECK(parse_likelihood("medium") == Likelihood::Medium);
  CHECK(parse_severity("Very High") == Severity::VeryHigh);
  CHECK_FALSE(parse_likelihood("Unknown").has_value());
  CHECK_FALSE(parse_severity("").has_value());
}

TEST_CASE("malformed catalogs") {
  SUBCASE("broken XML reports a position") {
    try {
      parse_cwe_catalog("<Weakness_Catalog>\n  <Weaknesses>\n    <Weakness ID=\"1\"\n</Weakness_Catalog>");
      FAIL("no error");
    } catch (const ParseError& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      CHECK(e.line() >= 3);
    }
  }
  SUBCASE("foreign root") {
    CHECK(kind_of([] { parse_cwe_catalog("<Attack_Pattern_Catalog/>"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_capec_catalog("<Weakness_Catalog/>"); }) == ErrorKind::Parse);
  }
  SUBCASE("duplicate ID") {
    const char* xml = "<Weakness_Catalog Version=\"x\"><Weaknesses>"
                      "<Weakness ID=\"7\" Name=\"a\"/><Weakness ID=\"7\" Name=\"b\"/>"
                      "</Weaknesses></Weakness_Catalog>";
    CHECK(kind_of([&] { parse_cwe_catalog(xml); }) == ErrorKind::Integrity);
  }
}

TEST_CASE("exploratory statistics on the fixture") {
  auto s = catalog_stats(fixture_cwe(), fixture_capec());
  CHECK(s.software_view_only);
  CHECK(s.weakness_count == 22);
  CHECK(s.pattern_count == 25);
  CHECK(s.le_missing_pct == doctest::Approx(100.0 * 10 / 22).epsilon(1e-12));
  CHECK(s.la_missing_pct == doctest::Approx(20.0));
  CHECK(s.ts_missing_pct == doctest::Approx(12.0));
  CHECK(s.modes_of_introduction.mean == doctest::Approx(1.5909090909090908));
  CHECK(s.modes_of_introduction.median == doctest::Approx(2.0));
  CHECK(s.modes_of_introduction.stddev == doctest::Approx(0.5767535245658872));
  CHECK(s.modes_of_introduction.max == 3);
  CHECK(s.consequence_entries.mean == doctest::Approx(1.9090909090909092));
  CHECK(s.consequence_entries.median == doctest::Approx(2.0));
  CHECK(s.consequence_entries.stddev == doctest::Approx(0.9958591954639384));
  CHECK(s.consequence_entries.max == 4);
  CHECK_FALSE(s.top_impacts.empty());
  CHECK(s.top_impacts.front().first == "Bypass Protection Mechanism");

  auto j = nlohmann::json::parse(render_stats_json(s));
  CHECK(j["weakness_count"] == 22);
  CHECK(j["cwe_version"] == "fixture-1.0");
}

TEST_CASE("distribution helper") {
  auto d = distribution_of({1, 1, 2, 4});
  CHECK(d.mean == doctest::Approx(2.0));
  CHECK(d.median == doctest::Approx(1.5));
  CHECK(d.stddev == doctest::Approx(std::sqrt(1.5)));
  CHECK(d.max == 4);
  CHECK(d.histogram.at(1) == 2);
  auto empty = distribution_of({});
  CHECK(empty.mean == 0.0);
}

TEST_CASE("imputation flags render and parse") {
  CHECK(flags_to_string(0).empty());
  CHECK(flags_to_string(kLeFromLa | kManualOverride) == "LE_FROM_LA|MANUAL_OVERRIDE");
  for (unsigned f = 0; f < 8; ++f)
    CHECK(flags_from_string(flags_to_string(f)) == f);
  CHECK(kind_of([] { flags_from_string("NOPE"); }) == ErrorKind::Parse);
}

TEST_CASE("pairing, imputation and discards on the fixture") {
  auto set = build_pairs(fixture_cwe(), fixture_capec(), default_overrides());

  SUBCASE("union of both sides' references") {
    // 918 -> 664 is declared only on the attack pattern.
    const auto* p = find_pair(set, 918, 664);
    REQUIRE(p != nullptr);
    CHECK(p->le == 2);
    CHECK(p->flags == kLeFromLa);
  }
  SUBCASE("pairwise imputation") {
    const auto* log = find_pair(set, 117, 93);
    REQUIRE(log != nullptr);
    CHECK(log->le == 3);
    CHECK(log->flags == kLeFromLa);
    const auto* debug = find_pair(set, 489, 121);
    REQUIRE(debug != nullptr);
    CHECK(debug->la == 2);
    CHECK(debug->flags == kLaFromLe);
  }
  SUBCASE("manual rows") {
    const auto* idor = find_pair(set, 639, 0);
    REQUIRE(idor != nullptr);
    CHECK(idor->likelihood() == 9);
    CHECK(idor->impact() == 15);
    CHECK(idor->raw_risk() == 135);
    CHECK(idor->flags == kManualOverride);

    const auto* abs = find_pair(set, 36, 597);
    REQUIRE(abs != nullptr);
    CHECK(abs->la == 3);
    CHECK(abs->le == 3);
    CHECK(abs->ts == 5);
    CHECK(abs->flags == (kManualOverride | kLeFromLa));

    // Substituted attack patterns replace the catalog's own links.
    CHECK(find_pair(set, 863, 114) != nullptr);
    CHECK(find_pair(set, 863, 3) != nullptr);
    for (int capec : {6, 15, 79}) {
      const auto* p = find_pair(set, 186, capec);
      REQUIRE(p != nullptr);
      CHECK(p->cc == 1);
      CHECK(find_pair(set, 185, capec) != nullptr);
      CHECK(find_pair(set, 185, capec)->cc == 2);
    }
  }
  SUBCASE("discard rules") {
    REQUIRE(find_discard(set, 770, 130) != nullptr);
    CHECK(find_discard(set, 770, 130)->reason == "LE and LA both missing");
    REQUIRE(find_discard(set, 212, 168) != nullptr);
    CHECK(find_discard(set, 212, 168)->reason == "TS missing");
    REQUIRE(find_discard(set, 95, 35) != nullptr);
    CHECK(find_discard(set, 95, 35)->reason == "no common consequences");
    REQUIRE(find_discard(set, 89, 9999) != nullptr);
    CHECK(find_discard(set, 89, 9999)->reason == "CAPEC not in catalog");
    CHECK(find_pair(set, 1333, 0) == nullptr);
  }
  SUBCASE("no override leaves the gaps in place") {
    auto bare = build_pairs(fixture_cwe(), fixture_capec());
    CHECK(find_pair(bare, 639, 0) == nullptr);
    CHECK(find_discard(bare, 36, 597) != nullptr);
    CHECK(find_pair(bare, 863, 114) == nullptr);
  }
}

TEST_CASE("zero counts discard the pair") {
  auto cands = link_candidates(fixture_cwe(), fixture_capec());
  for (auto& c : cands)
    if (c.cwe_id == 22)
      c.mi = 0;
  auto set = resolve_pairs(cands);
  REQUIRE(find_discard(set, 22, 126) != nullptr);
  CHECK(find_discard(set, 22, 126)->reason == "no modes of introduction");
}

TEST_CASE("overrides naming unknown records are configuration errors") {
  OverrideTable unknown_cwe{{.cwe_id = 4242, .le = 3}};
  CHECK(kind_of([&] { build_pairs(fixture_cwe(), fixture_capec(), unknown_cwe); }) == ErrorKind::Config);
  OverrideTable unknown_capec{{.cwe_id = 22, .capec_ids = {4242}}};
  CHECK(kind_of([&] { build_pairs(fixture_cwe(), fixture_capec(), unknown_capec); }) == ErrorKind::Config);
}

TEST_CASE("override table text") {
  const auto& d = default_overrides();
  REQUIRE(d.size() == 5);
  std::vector<int> ids;
  for (const auto& r : d)
    ids.push_back(r.cwe_id);
  CHECK(ids == std::vector<int>{36, 186, 212, 639, 863});

  auto round = parse_override_table(render_override_table(d));
  REQUIRE(round.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(round[i].cwe_id == d[i].cwe_id);
    CHECK(round[i].le == d[i].le);
    CHECK(round[i].la == d[i].la);
    CHECK(round[i].mi == d[i].mi);
    CHECK(round[i].cc == d[i].cc);
    CHECK(round[i].ts == d[i].ts);
    CHECK(round[i].capec_ids == d[i].capec_ids);
  }

  SUBCASE("shipped file matches the built-in rows") {
    auto shipped = parse_override_table(slurp(testsupport::data_file("overrides.csv")));
    CHECK(render_override_table(shipped) == render_override_table(d));
  }
  SUBCASE("separators") {
    auto t = parse_override_table("cwe_id,le,la,mi,cc,ts,capec_ids,note\n22,,,,,,1;3|6 15,\n");
    REQUIRE(t.size() == 1);
    CHECK(t[0].capec_ids == std::vector<int>{1, 3, 6, 15});
    CHECK_FALSE(t[0].le.has_value());
  }
  SUBCASE("range and duplicates") {
    CHECK(kind_of([] { parse_override_table("cwe_id,le\n22,4\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_override_table("cwe_id,ts\n22,6\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_override_table("cwe_id,le\n22,1\n22,2\n"); }) == ErrorKind::Config);
  }
}

TEST_CASE("risk index matches the independent oracle") {
  auto sc = build_scored_catalog(slurp(fixture("catalog/cwe_fixture.xml")),
                                 slurp(fixture("catalog/capec_fixture.xml")), default_overrides());
  auto golden = nlohmann::json::parse(slurp(testsupport::source_dir() / "tests/golden/expected_risk.json"));
  CHECK(sc.index.size() == golden["risk_index"].size());
  for (const auto& [key, value] : golden["risk_index"].items()) {
    int cwe = std::stoi(key);
    REQUIRE(sc.index.count(cwe) == 1);
    CHECK(sc.index.at(cwe).raw_risk == golden["raw"][key].get<long long>());
    CHECK(sc.index.at(cwe).risk_index == doctest::Approx(value.get<double>()).epsilon(1e-12));
  }
  CHECK(sc.index.at(639).flags() == kManualOverride);
  CHECK(sc.index.at(22).raw_risk == 270);
}

TEST_CASE("risk index rejects an empty pair set") {
  CHECK(kind_of([] { compute_cwe_risk_index({}); }) == ErrorKind::Scoring);
}

TEST_CASE("risk index invariants under reordering") {
  auto base = build_pairs(fixture_cwe(), fixture_capec(), default_overrides());
  auto reference = compute_cwe_risk_index(base.pairs);
  std::mt19937_64 rng(20250601);
  for (int trial = 0; trial < 50; ++trial) {
    WeaknessCatalog w = fixture_cwe();
    AttackPatternCatalog p = fixture_capec();
    std::shuffle(w.weaknesses.begin(), w.weaknesses.end(), rng);
    std::shuffle(p.patterns.begin(), p.patterns.end(), rng);
    auto set = build_pairs(w, p, default_overrides());
    auto idx = compute_cwe_risk_index(set.pairs);
    REQUIRE(idx.size() == reference.size());
    for (const auto& [cwe, e] : reference) {
      CHECK(idx.at(cwe).raw_risk == e.raw_risk);
      CHECK(idx.at(cwe).risk_index == e.risk_index);
    }
  }
}

TEST_CASE("risk index normalization on random pair sets") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> lik(1, 3), sev(1, 5), cnt(1, 6), cwe(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CweCapecPair> pairs;
    const int n = 1 + trial % 40;
    for (int i = 0; i < n; ++i)
      pairs.push_back({cwe(rng), i + 1, lik(rng), lik(rng), cnt(rng), cnt(rng), sev(rng), 0});
    auto idx = compute_cwe_risk_index(pairs);
    std::int64_t max_raw = 0;
    for (const auto& p : pairs)
      max_raw = std::max(max_raw, p.raw_risk());
    int at_top = 0;
    for (const auto& [id, e] : idx) {
      std::int64_t best = 0;
      for (const auto& p : pairs)
        if (p.cwe_id == id)
          best = std::max(best, p.raw_risk());
      CHECK(e.raw_risk == best);
      CHECK(e.risk_index == doctest::Approx(100.0 * best / max_raw).epsilon(1e-12));
      CHECK(e.risk_index <= 100.0);
      CHECK(e.risk_index > 0.0);
      at_top += e.risk_index == 100.0;
    }
    CHECK(at_top >= 1);
  }
}

TEST_CASE("risk table round trip") {
  auto sc = build_scored_catalog(slurp(fixture("catalog/cwe_fixture.xml")),
                                 slurp(fixture("catalog/capec_fixture.xml")), default_overrides());
  auto rows = risk_rows(sc.index, sc.weaknesses);
  auto text = render_risk_table(rows);
  auto back = parse_risk_table(text);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].cwe_id == rows[i].cwe_id);
    CHECK(back[i].name == rows[i].name);
    CHECK(back[i].raw_risk == rows[i].raw_risk);
    CHECK(back[i].flags == rows[i].flags);
    CHECK(back[i].risk_index == doctest::Approx(rows[i].risk_index).epsilon(1e-9));
  }
  CHECK(render_risk_table(back) == text);
  auto w = risk_weights(back);
  CHECK(w.at(89) == doctest::Approx(100.0));
}

} // TEST_SUITE
