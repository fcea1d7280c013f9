// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <doctest.h>

#include "test_support.hpp"

using testsupport::fixture;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args) {
  std::string cmd = std::string("MCP_RISK_TOKEN= \"") + MCPRISK_CLI + "\" " + args + " 2>&1";
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p))
    r.output.append(buf, n);
  int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

std::string corpus_flags() {
  return " --cwe-xml " + q(fixture("catalog/cwe_fixture.xml")) + " --capec-xml " +
         q(fixture("catalog/capec_fixture.xml")) + " --findings-dir " + q(fixture("corpus/findings")) +
         " --joern-manifest " + q(fixture("corpus/joern_manifest.csv")) + " --scanner-map " +
         q(fixture("corpus/scanner_map.csv"));
}

} // namespace

TEST_CASE("help and version") {
  CHECK(run("--help").code == 0);
  auto v = run("--version");
  CHECK(v.code == 0);
  CHECK_FALSE(v.output.empty());
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("run --no-such-flag").code == 2);
  auto r = run("run --out /tmp/mcprisk-cli-unused");
  CHECK(r.code == 2);
  CHECK(r.output.find("--cwe-xml") != std::string::npos);
  CHECK(run("run --dedup sideways" + corpus_flags() + " --out /tmp/mcprisk-cli-unused").code == 2);
}

TEST_CASE("full run and stages") {
  testsupport::TempDir tmp;
  auto r = run("run" + corpus_flags() + " --render --out " + q(tmp / "out"));
  CHECK_MESSAGE(r.code == 0, r.output);
  CHECK(std::filesystem::exists(tmp / "out/charts/cooccurrence.svg"));

  CHECK(run("catalog" + std::string(" --cwe-xml ") + q(fixture("catalog/cwe_fixture.xml")) + " --capec-xml " +
            q(fixture("catalog/capec_fixture.xml")) + " --out " + q(tmp / "staged"))
            .code == 0);
  CHECK(run("ingest --findings-dir " + q(fixture("corpus/findings")) + " --joern-manifest " +
            q(fixture("corpus/joern_manifest.csv")) + " --scanner-map " + q(fixture("corpus/scanner_map.csv")) +
            " --out " + q(tmp / "staged"))
            .code == 0);
  CHECK(run("score --out " + q(tmp / "staged")).code == 0);
  CHECK(run("surfaces --out " + q(tmp / "staged")).code == 0);
  CHECK(run("report --format json --out " + q(tmp / "staged")).code == 0);
  CHECK(testsupport::slurp(tmp / "staged/scores.csv") == testsupport::slurp(tmp / "out/scores.csv"));
  CHECK(std::filesystem::exists(tmp / "staged/report/repo_scatter.json"));
}

TEST_CASE("parse errors exit with 3") {
  testsupport::TempDir tmp;
  testsupport::spit(tmp / "bad.xml", "<Weakness_Catalog><oops>");
  auto r = run("catalog --cwe-xml " + q(tmp / "bad.xml") + " --capec-xml " +
               q(fixture("catalog/capec_fixture.xml")) + " --out " + q(tmp / "out"));
  CHECK(r.code == 3);
  CHECK(r.output.find("parse") != std::string::npos);
}

TEST_CASE("scoring errors exit with 4") {
  testsupport::TempDir tmp;
  // Every profile CWE lacks a weight, so no repository can be scored and the
  // corpus-wide shares are undefined.
  testsupport::spit(tmp / "findings/r1/a.sarif",
                    R"({"version":"2.1.0","runs":[{"tool":{"driver":{"name":"t"}},"results":[{"ruleId":"x",
                    "properties":{"cwe":"CWE-1333"},"locations":[{"physicalLocation":{"artifactLocation":{"uri":"a.py"},
                    "region":{"startLine":1}}}]}]}]})");
  auto r = run("run --cwe-xml " + q(fixture("catalog/cwe_fixture.xml")) + " --capec-xml " +
               q(fixture("catalog/capec_fixture.xml")) + " --findings-dir " + q(tmp / "findings") + " --out " +
               q(tmp / "out"));
  CHECK_MESSAGE(r.code == 4, r.output);
  CHECK_FALSE(std::filesystem::exists(tmp / "out"));
}

TEST_CASE("configuration file values override flags") {
  testsupport::TempDir tmp;
  testsupport::spit(tmp / "cfg.json", R"({"dedup": "bogus"})");
  auto r = run("run" + corpus_flags() + " --dedup location --config " + q(tmp / "cfg.json") + " --out " +
               q(tmp / "out"));
  CHECK(r.code == 2);
  CHECK(r.output.find("bogus") != std::string::npos);
}

TEST_CASE("harvest") {
  testsupport::TempDir tmp;
  auto r = run("harvest --replay " + q(fixture("harvest/corpus.json")) + " --out " + q(tmp / "snap.json"));
  CHECK_MESSAGE(r.code == 0, r.output);
  CHECK(r.output.find("fetched 6, retained 3, excluded 3") != std::string::npos);
  CHECK(run("harvest --live --out " + q(tmp / "live.json")).code == 1); // no token
  CHECK(run("harvest --replay " + q(fixture("harvest/unauthorized.json")) + " --out " + q(tmp / "x.json")).code == 1);
  CHECK(run("harvest --out " + q(tmp / "y.json")).code == 2);
}
