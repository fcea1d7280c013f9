// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>
#include <json.hpp>

#include "mcprisk/error.hpp"
#include "mcprisk/harvest.hpp"
#include "mcprisk/pipeline.hpp"
#include "mcprisk/report.hpp"
#include "test_support.hpp"

using namespace mcprisk;
using namespace mcprisk::pipeline;
using testsupport::fixture;
using testsupport::slurp;
namespace fs = std::filesystem;

namespace {

PipelineConfig corpus_config(const fs::path& out) {
  PipelineConfig c;
  c.set("cwe-xml", fixture("catalog/cwe_fixture.xml").string());
  c.set("capec-xml", fixture("catalog/capec_fixture.xml").string());
  c.set("findings-dir", fixture("corpus/findings").string());
  c.set("joern-manifest", fixture("corpus/joern_manifest.csv").string());
  c.set("scanner-map", fixture("corpus/scanner_map.csv").string());
  c.set("out", out.string());
  return c;
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

TEST_SUITE("pipeline") {

TEST_CASE("configuration keys") {
  PipelineConfig c;
  c.set("dedup", "cwe-level");
  c.set("chain-threshold", "70");
  c.set("render", "true");
  c.set("threads", "3");
  c.set("format", "json");
  CHECK(c.dedup == findings::DedupMode::CweLevel);
  CHECK(c.chain_threshold == 70.0);
  CHECK(c.render);
  CHECK(c.threads == 3);
  CHECK(kind_of([&] { c.set("colour", "x"); }) == ErrorKind::Config);
  CHECK(kind_of([&] { c.set("threads", "-1"); }) == ErrorKind::Config);
  CHECK(kind_of([&] { c.set("chain-threshold", "abc"); }) == ErrorKind::Config);
  CHECK(kind_of([&] { c.set("dedup", "file"); }) == ErrorKind::Config);

  c.merge_json(R"({"dedup":"location","chain-threshold":60,"render":false})");
  CHECK(c.dedup == findings::DedupMode::Location);
  CHECK(c.chain_threshold == 60.0);
  CHECK_FALSE(c.render);
  CHECK(kind_of([&] { c.merge_json("[1]"); }) == ErrorKind::Config);

  PipelineConfig a, b;
  a.set("out", "/tmp/one");
  a.set("threads", "1");
  b.set("out", "/tmp/two");
  CHECK(a.canonical_json() == b.canonical_json());
  b.set("dedup", "cwe-level");
  CHECK(a.canonical_json() != b.canonical_json());
}

TEST_CASE("validation") {
  testsupport::TempDir tmp;
  auto c = corpus_config(tmp / "out");
  CHECK_NOTHROW(validate(c, Stage::Run));

  auto missing = c;
  missing.cwe_xml = tmp / "absent.xml";
  CHECK(kind_of([&] { validate(missing, Stage::Catalog); }) == ErrorKind::Config);

  PipelineConfig empty;
  CHECK(kind_of([&] { validate(empty, Stage::Run); }) == ErrorKind::Config);

  // Later stages need the earlier artifacts in the output directory.
  CHECK(kind_of([&] { validate(c, Stage::Score); }) == ErrorKind::Config);

  auto render_json = c;
  render_json.render = true;
  render_json.report_format = "json";
  CHECK(kind_of([&] { validate(render_json, Stage::Run); }) == ErrorKind::Config);
}

TEST_CASE("stage by stage equals the whole run") {
  testsupport::TempDir tmp;
  auto staged = corpus_config(tmp / "staged");
  run_catalog_stage(staged);
  run_ingest_stage(staged);
  run_score_stage(staged);
  run_surfaces_stage(staged);
  run_report_stage(staged);

  auto whole = corpus_config(tmp / "whole");
  run_pipeline(whole);
  for (auto name : {kRiskIndexFile, kProfilesFile, kScoresCsvFile, kSharesFile, kMatrixJsonFile, kChainsFile,
                    kSkippedFile, kBandsFile, kDiscardsFile})
    CHECK(slurp(tmp / "staged" / std::string(name)) == slurp(tmp / "whole" / std::string(name)));
  CHECK(fs::exists(tmp / "whole" / std::string(kManifestFile)));
  CHECK(fs::exists(tmp / "whole/report/cwe_frequency.csv"));

  auto skipped = slurp(tmp / "whole" / std::string(kSkippedFile));
  CHECK(skipped.find("gamma,no_cwe,1") != std::string::npos);
  CHECK(skipped.find("gamma,unscorable_cwe,1") != std::string::npos);
  CHECK(skipped.find("zeta,unscorable_cwe,1") != std::string::npos);

  auto manifest = nlohmann::json::parse(slurp(tmp / "whole" / std::string(kManifestFile)));
  CHECK(manifest["tool"] == "mcprisk");
  CHECK(manifest["cwe_version"] == "fixture-1.0");
  CHECK(manifest["inputs"].contains("findings-dir"));
  CHECK(manifest["artifacts"].contains("scores.csv"));
}

TEST_CASE("failed runs leave the output untouched") {
  testsupport::TempDir tmp;
  testsupport::spit(tmp / "out/keep.txt", "previous");
  auto c = corpus_config(tmp / "out");
  testsupport::spit(tmp / "bad.xml", "<Weakness_Catalog><Weaknesses>");
  c.cwe_xml = tmp / "bad.xml";
  CHECK(kind_of([&] { run_pipeline(c); }) == ErrorKind::Parse);
  CHECK(slurp(tmp / "out/keep.txt") == "previous");
  CHECK_FALSE(fs::exists(tmp / "out" / std::string(kScoresCsvFile)));
  for (const auto& e : fs::directory_iterator(tmp.path()))
    CHECK(e.path().filename().string().find("staging") == std::string::npos);
}

TEST_CASE("reports and charts") {
  testsupport::TempDir tmp;
  auto c = corpus_config(tmp / "out");
  c.render = true;
  run_pipeline(c);
  for (auto f : {"cwe_frequency", "repo_scatter", "surface_shares", "band_distribution", "cooccurrence"}) {
    CHECK(fs::exists(tmp / "out/report" / (std::string(f) + ".csv")));
    auto svg = slurp(tmp / "out/charts" / (std::string(f) + ".svg"));
    CHECK(svg.starts_with("<svg"));
  }
  auto scatter = slurp(tmp / "out/report/repo_scatter.csv");
  CHECK(scatter.find("gamma") == std::string::npos);

  auto j = corpus_config(tmp / "json");
  j.report_format = "json";
  run_pipeline(j);
  auto freq = nlohmann::json::parse(slurp(tmp / "json/report/cwe_frequency.json"));
  CHECK(freq.is_array());
  CHECK(freq.size() > 0);

  fs::remove(tmp / "out/report/repo_scatter.csv");
  try {
    report::render_charts(tmp / "out/report", tmp / "charts2");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
    CHECK(std::string(e.what()).find("repo_scatter") != std::string::npos);
  }
  CHECK(kind_of([] { report::format_from_string("xml"); }) == ErrorKind::Usage);
}

TEST_CASE("harvest from a recording") {
  testsupport::TempDir tmp;
  HarvestConfig h;
  h.set("replay", fixture("harvest/corpus.json").string());
  h.set("out", (tmp / "snap.json").string());
  auto summary = run_harvest(h);
  CHECK(summary.fetched == 6);
  CHECK(summary.retained == 3);
  CHECK(summary.excluded == 3);
  auto snap = harvest::load_snapshot(tmp / "snap.json");
  CHECK(snap.snapshot_time == "2025-06-30T12:00:00Z");
  REQUIRE(snap.repositories.size() == 3);
  CHECK(snap.repositories[0].full_name == "acme/files-mcp");
  auto log = slurp(tmp / "snap.exclusions.csv");
  CHECK(log.find("org/dvmcp") != std::string::npos);

  HarvestConfig neither;
  neither.set("out", (tmp / "x.json").string());
  CHECK(kind_of([&] { run_harvest(neither); }) == ErrorKind::Config);
  CHECK(kind_of([&] { h.set("page-limit", "0"); }) == ErrorKind::Config);
}

} // TEST_SUITE
