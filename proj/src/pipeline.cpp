// SPDX-License-Identifier: Apache-2.0
#include "mcprisk/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "mcprisk/catalog.hpp"
#include "mcprisk/error.hpp"
#include "mcprisk/harvest.hpp"
#include "mcprisk/io.hpp"
#include "mcprisk/report.hpp"
#include "mcprisk/scoring.hpp"
#include "mcprisk/surfaces.hpp"
#include "mcprisk/table.hpp"

#ifndef MCPRISK_VERSION
#define MCPRISK_VERSION "0.0.0"
#endif

namespace mcprisk::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw Error(ErrorKind::Config, fmt::format("{}: expected a boolean, got '{}'", key, v));
}

double parse_number(std::string_view key, std::string_view v) {
  try {
    return table::to_real(v, key);
  } catch (const Error&) {
    throw Error(ErrorKind::Config, fmt::format("{}: expected a number, got '{}'", key, v));
  }
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string())
    return v.get<std::string>();
  if (v.is_boolean())
    return v.get<bool>() ? "true" : "false";
  return v.dump();
}

void require_file(const fs::path& p, std::string_view what) {
  if (p.empty())
    throw Error(ErrorKind::Config, fmt::format("{} not configured", what));
  if (!fs::is_regular_file(p))
    throw Error(ErrorKind::Config, fmt::format("{} {} does not exist", what, p.string()));
}

void optional_file(const fs::path& p, std::string_view what) {
  if (!p.empty())
    require_file(p, what);
}

void require_creatable(const fs::path& out) {
  if (out.empty())
    throw Error(ErrorKind::Config, "output directory (--out) not configured");
  fs::path probe = fs::absolute(out);
  while (!fs::exists(probe) && probe.has_parent_path() && probe != probe.parent_path())
    probe = probe.parent_path();
  if (!fs::is_directory(probe) || ::access(probe.c_str(), W_OK) != 0)
    throw Error(ErrorKind::Config, fmt::format("output directory {} cannot be created", out.string()));
}

catalog::OverrideTable load_overrides(const PipelineConfig& c) {
  if (c.overrides.empty())
    return catalog::default_overrides();
  return catalog::parse_override_table(io::read_file(c.overrides));
}

surfaces::SurfaceMap load_surface_map(const PipelineConfig& c) {
  if (c.surface_map.empty())
    return surfaces::SurfaceMap::builtin();
  return surfaces::SurfaceMap::parse(io::read_file(c.surface_map));
}

void write(const fs::path& dir, std::string_view name, std::string_view content) {
  io::write_file(dir / name, content);
}

std::string read(const fs::path& dir, std::string_view name) { return io::read_file(dir / name); }

// Stage bodies take the working directory explicitly so run_pipeline can
// point them at its staging area.

void catalog_stage(const PipelineConfig& c, const fs::path& dir) {
  const auto overrides = load_overrides(c);
  const std::string cwe_xml = io::read_file(c.cwe_xml);
  const std::string capec_xml = io::read_file(c.capec_xml);
  auto scored = catalog::build_scored_catalog(cwe_xml, capec_xml, overrides);

  write(dir, kRiskIndexFile, catalog::render_risk_table(catalog::risk_rows(scored.index, scored.weaknesses)));
  write(dir, kCatalogStatsFile, catalog::render_stats_json(catalog::catalog_stats(scored.weaknesses, scored.patterns)));

  table::Table d;
  d.header = {"cwe_id", "capec_id", "reason"};
  for (const auto& x : scored.pairs.discards)
    d.rows.push_back({std::to_string(x.cwe_id), std::to_string(x.capec_id), x.reason});
  write(dir, kDiscardsFile, table::render(d));
}

void ingest_stage(const PipelineConfig& c, const fs::path& dir) {
  findings::IngestOptions opts;
  opts.dedup = c.dedup;
  opts.threads = c.threads;
  findings::CweLookup joern, scanner;
  if (!c.joern_manifest.empty()) {
    joern = findings::parse_cwe_lookup(io::read_file(c.joern_manifest), "Joern query manifest");
    opts.joern_manifest = &joern;
  }
  if (!c.scanner_map.empty()) {
    scanner = findings::parse_cwe_lookup(io::read_file(c.scanner_map), "scanner category map");
    opts.scanner_map = &scanner;
  }
  write(dir, kProfilesFile, findings::render_profiles_json(findings::ingest_directory(c.findings_dir, opts)));
}

struct Scored {
  std::vector<catalog::RiskRow> risk;
  scoring::RiskWeights weights;
  findings::ProfileMap profiles; // unweighted CWEs removed
  std::map<std::string, int> unscorable;
  std::map<std::string, int> no_cwe;
};

Scored load_scored(const fs::path& dir) {
  Scored s;
  s.risk = catalog::parse_risk_table(read(dir, kRiskIndexFile));
  s.weights = catalog::risk_weights(s.risk);
  s.profiles = findings::parse_profiles_json(read(dir, kProfilesFile));
  for (const auto& [repo, p] : s.profiles)
    if (p.skipped > 0)
      s.no_cwe[repo] = p.skipped;
  s.unscorable = scoring::drop_unweighted(s.profiles, s.weights);
  return s;
}

void score_stage(const PipelineConfig&, const fs::path& dir) {
  Scored s = load_scored(dir);
  auto scores = scoring::score_repositories(s.profiles, s.weights);

  table::Table skipped;
  skipped.header = {"repo_id", "reason", "count"};
  for (const auto& [repo, p] : s.profiles) {
    if (auto it = s.no_cwe.find(repo); it != s.no_cwe.end())
      skipped.rows.push_back({repo, "no_cwe", std::to_string(it->second)});
    if (auto it = s.unscorable.find(repo); it != s.unscorable.end())
      skipped.rows.push_back({repo, "unscorable_cwe", std::to_string(it->second)});
  }
  write(dir, kSkippedFile, table::render(skipped));
  write(dir, kScoresCsvFile, scoring::render_scores_csv(scores));
  write(dir, kScoresJsonFile, scoring::render_scores_json(scores));

  table::Table bands;
  bands.header = {"band", "count"};
  for (auto [band, n] : scoring::band_histogram(scores))
    bands.rows.push_back({std::string(scoring::to_string(band)), std::to_string(n)});
  write(dir, kBandsFile, table::render(bands));
}

void surfaces_stage(const PipelineConfig& c, const fs::path& dir) {
  Scored s = load_scored(dir);
  const auto map = load_surface_map(c);
  auto shares = surfaces::surface_shares(s.profiles, s.weights, map);
  auto matrix = surfaces::cooccurrence(s.profiles, map);
  write(dir, kSharesFile, surfaces::render_shares_csv(shares));
  write(dir, kMatrixCsvFile, surfaces::render_matrix_csv(matrix));
  write(dir, kMatrixJsonFile, surfaces::render_matrix_json(matrix));
  write(dir, kChainsFile, surfaces::render_chains_csv(surfaces::chain_report(matrix, c.chain_threshold)));
}

void report_stage(const PipelineConfig& c, const fs::path& dir) {
  Scored s = load_scored(dir);
  report::ReportInputs in;
  in.risk = std::move(s.risk);
  in.profiles = std::move(s.profiles);
  in.scores = scoring::parse_scores_csv(read(dir, kScoresCsvFile));
  in.shares = surfaces::parse_shares_csv(read(dir, kSharesFile));
  in.matrix = surfaces::parse_matrix_json(read(dir, kMatrixJsonFile));
  in.surface_map = load_surface_map(c);
  const auto format = report::format_from_string(c.report_format);
  report::emit_report(in, format, dir / kReportDir);
  if (c.render)
    report::render_charts(dir / kReportDir, dir / kChartsDir);
}

std::string digest_file(const fs::path& p) { return io::fnv1a_hex(io::read_file(p)); }

std::string digest_tree(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file())
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files)
    acc += fmt::format("{}\t{}\n", fs::relative(f, root).generic_string(), digest_file(f));
  return io::fnv1a_hex(acc);
}

void write_manifest(const PipelineConfig& c, const fs::path& dir) {
  auto stats = nlohmann::json::parse(read(dir, kCatalogStatsFile));
  ordered_json m;
  m["tool"] = "mcprisk";
  m["version"] = MCPRISK_VERSION;
  m["cwe_version"] = stats.value("cwe_version", "");
  m["capec_version"] = stats.value("capec_version", "");
  m["config_hash"] = io::fnv1a_hex(c.canonical_json());
  m["dedup"] = findings::to_string(c.dedup);

  auto& inputs = m["inputs"] = ordered_json::object();
  inputs["cwe-xml"] = digest_file(c.cwe_xml);
  inputs["capec-xml"] = digest_file(c.capec_xml);
  inputs["overrides"] = c.overrides.empty() ? io::fnv1a_hex(catalog::render_override_table(catalog::default_overrides()))
                                            : digest_file(c.overrides);
  inputs["surface-map"] =
      c.surface_map.empty() ? io::fnv1a_hex(surfaces::SurfaceMap::builtin().render()) : digest_file(c.surface_map);
  if (!c.joern_manifest.empty())
    inputs["joern-manifest"] = digest_file(c.joern_manifest);
  if (!c.scanner_map.empty())
    inputs["scanner-map"] = digest_file(c.scanner_map);
  inputs["findings-dir"] = digest_tree(c.findings_dir);

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != kManifestFile)
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  auto& artifacts = m["artifacts"] = ordered_json::object();
  for (const auto& f : files)
    artifacts[fs::relative(f, dir).generic_string()] = digest_file(f);
  write(dir, kManifestFile, m.dump(2) + "\n");
}

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                   std::chrono::system_clock::now())));
}

} // namespace

void PipelineConfig::set(std::string_view key, std::string_view value) {
  if (key == "cwe-xml")
    cwe_xml = value;
  else if (key == "capec-xml")
    capec_xml = value;
  else if (key == "overrides")
    overrides = value;
  else if (key == "surface-map")
    surface_map = value;
  else if (key == "joern-manifest")
    joern_manifest = value;
  else if (key == "scanner-map")
    scanner_map = value;
  else if (key == "findings-dir")
    findings_dir = value;
  else if (key == "out")
    out = value;
  else if (key == "dedup")
    dedup = findings::dedup_mode_from_string(value);
  else if (key == "format") {
    try {
      report::format_from_string(value);
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, e.what());
    }
    report_format = value;
  } else if (key == "chain-threshold")
    chain_threshold = parse_number(key, value);
  else if (key == "render")
    render = parse_bool(key, value);
  else if (key == "threads") {
    double t = parse_number(key, value);
    if (t < 0 || t != std::floor(t))
      throw Error(ErrorKind::Config, fmt::format("threads: expected a non-negative integer, got '{}'", value));
    threads = static_cast<unsigned>(t);
  } else
    throw Error(ErrorKind::Config, fmt::format("unknown configuration key '{}'", key));
}

void PipelineConfig::merge_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, fmt::format("configuration file is not valid JSON: {}", e.what()));
  }
  if (!j.is_object())
    throw Error(ErrorKind::Config, "configuration file must hold a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (v.is_null())
      continue;
    if (v.is_object() || v.is_array())
      throw Error(ErrorKind::Config, fmt::format("{}: expected a scalar value", k));
    set(k, scalar_text(v));
  }
}

std::string PipelineConfig::canonical_json() const {
  // Output location and thread count do not influence any artifact.
  ordered_json j;
  j["cwe-xml"] = cwe_xml.generic_string();
  j["capec-xml"] = capec_xml.generic_string();
  j["overrides"] = overrides.generic_string();
  j["surface-map"] = surface_map.generic_string();
  j["joern-manifest"] = joern_manifest.generic_string();
  j["scanner-map"] = scanner_map.generic_string();
  j["findings-dir"] = findings_dir.generic_string();
  j["dedup"] = findings::to_string(dedup);
  j["format"] = report_format;
  j["chain-threshold"] = chain_threshold;
  j["render"] = render;
  return j.dump();
}

void validate(const PipelineConfig& c, Stage stage) {
  const bool run = stage == Stage::Run;
  if (run || stage == Stage::Catalog) {
    require_file(c.cwe_xml, "CWE catalog (--cwe-xml)");
    require_file(c.capec_xml, "CAPEC catalog (--capec-xml)");
    optional_file(c.overrides, "override table (--overrides)");
  }
  if (run || stage == Stage::Ingest) {
    if (c.findings_dir.empty())
      throw Error(ErrorKind::Config, "findings directory (--findings-dir) not configured");
    if (!fs::is_directory(c.findings_dir))
      throw Error(ErrorKind::Config, fmt::format("findings directory {} does not exist", c.findings_dir.string()));
    optional_file(c.joern_manifest, "Joern query manifest (--joern-manifest)");
    optional_file(c.scanner_map, "scanner category map (--scanner-map)");
  }
  if (run || stage == Stage::Surfaces || stage == Stage::Report)
    optional_file(c.surface_map, "surface map (--surface-map)");
  require_creatable(c.out);

  auto needs = [&](std::initializer_list<std::string_view> names) {
    for (auto n : names)
      if (!fs::is_regular_file(c.out / n))
        throw Error(ErrorKind::Config,
                    fmt::format("{} not found in {}; run the earlier stages first", n, c.out.string()));
  };
  if (stage == Stage::Score || stage == Stage::Surfaces)
    needs({kRiskIndexFile, kProfilesFile});
  if (stage == Stage::Report)
    needs({kRiskIndexFile, kProfilesFile, kScoresCsvFile, kSharesFile, kMatrixJsonFile});
  if (run || stage == Stage::Report) {
    try {
      if (report::format_from_string(c.report_format) == report::Format::Json && c.render)
        throw Error(ErrorKind::Config, "--render needs the delimited report format");
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, e.what());
    }
  }
}

void run_catalog_stage(const PipelineConfig& c) {
  validate(c, Stage::Catalog);
  catalog_stage(c, c.out);
}
void run_ingest_stage(const PipelineConfig& c) {
  validate(c, Stage::Ingest);
  ingest_stage(c, c.out);
}
void run_score_stage(const PipelineConfig& c) {
  validate(c, Stage::Score);
  score_stage(c, c.out);
}
void run_surfaces_stage(const PipelineConfig& c) {
  validate(c, Stage::Surfaces);
  surfaces_stage(c, c.out);
}
void run_report_stage(const PipelineConfig& c) {
  validate(c, Stage::Report);
  report_stage(c, c.out);
}

void run_pipeline(const PipelineConfig& c) {
  validate(c, Stage::Run);
  const fs::path out = fs::absolute(c.out).lexically_normal();
  const fs::path parent = out.has_filename() ? out.parent_path() : out.parent_path().parent_path();
  fs::create_directories(parent);
  const fs::path staging = parent / fmt::format(".{}.staging-{}", out.filename().string(), ::getpid());
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    catalog_stage(c, staging);
    ingest_stage(c, staging);
    score_stage(c, staging);
    surfaces_stage(c, staging);
    report_stage(c, staging);
    write_manifest(c, staging);

    fs::create_directories(out);
    for (const auto& e : fs::directory_iterator(staging)) {
      const fs::path target = out / e.path().filename();
      fs::remove_all(target);
      fs::rename(e.path(), target);
    }
    fs::remove_all(staging);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

// ---------------------------------------------------------------------------

void HarvestConfig::set(std::string_view key, std::string_view value) {
  if (key == "query")
    query = value;
  else if (key == "page-limit") {
    double v = parse_number(key, value);
    if (v < 1 || v != std::floor(v))
      throw Error(ErrorKind::Config, fmt::format("page-limit: expected a positive integer, got '{}'", value));
    page_limit = static_cast<int>(v);
  } else if (key == "replay")
    replay = value;
  else if (key == "live")
    live = parse_bool(key, value);
  else if (key == "rules")
    rules = value;
  else if (key == "out")
    out = value;
  else if (key == "snapshot-time")
    snapshot_time = value;
  else if (key == "api-base")
    api_base = value;
  else
    throw Error(ErrorKind::Config, fmt::format("unknown harvest option '{}'", key));
}

HarvestSummary run_harvest(const HarvestConfig& c) {
  if (c.out.empty())
    throw Error(ErrorKind::Config, "harvest: output manifest path (--out) not configured");
  if (c.live == !c.replay.empty())
    throw Error(ErrorKind::Config, "harvest: give exactly one of --replay or --live");
  optional_file(c.replay, "harvest recording (--replay)");
  optional_file(c.rules, "exclusion rules (--rules)");
  require_creatable(c.out.has_parent_path() ? c.out.parent_path() : fs::path("."));

  harvest::SearchOptions opts;
  if (!c.query.empty())
    opts.query = c.query;
  opts.page_limit = c.page_limit;
  if (!c.api_base.empty())
    opts.api_base = c.api_base;
  const char* token = std::getenv(std::string(harvest::kTokenVariable).c_str());
  if (token)
    opts.token = token;

  std::unique_ptr<harvest::HttpTransport> transport;
  std::string default_time;
  if (c.live) {
    if (opts.token.empty())
      throw Error(ErrorKind::Auth, fmt::format("live harvest needs a token in {}", harvest::kTokenVariable));
    transport = harvest::make_curl_transport();
    default_time = utc_now();
  } else {
    auto replay = std::make_unique<harvest::ReplayTransport>(io::read_file(c.replay));
    default_time = replay->recorded_at();
    opts.sleep = [](std::chrono::milliseconds) {};
    transport = std::move(replay);
  }
  opts.snapshot_time = c.snapshot_time.empty() ? default_time : c.snapshot_time;

  auto result = harvest::search_repositories(*transport, opts);
  const auto rules = c.rules.empty() ? harvest::default_exclusion_rules()
                                     : harvest::parse_exclusion_rules(io::read_file(c.rules));
  auto filtered = harvest::filter_repositories(result.repositories, rules);

  harvest::Snapshot snap{opts.query, opts.snapshot_time, filtered.retained};
  harvest::save_snapshot(snap, c.out);

  table::Table log;
  log.header = {"full_name", "pattern", "reason"};
  for (const auto& e : filtered.excluded)
    log.rows.push_back({e.full_name, e.pattern, e.reason});
  fs::path log_path = c.out;
  log_path.replace_extension(".exclusions.csv");
  io::write_file(log_path, table::render(log));

  return {result.repositories.size(), filtered.retained.size(), filtered.excluded.size(), result.warnings.size()};
}

} // namespace mcprisk::pipeline
