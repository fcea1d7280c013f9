// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the library only through mcprisk.h.
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcprisk.h"

namespace {

struct Flag {
  const char* key;
  const char* help;
};

constexpr Flag kCatalogFlags[] = {
    {"cwe-xml", "CWE catalog XML (optionally .gz)"},
    {"capec-xml", "CAPEC catalog XML (optionally .gz)"},
    {"overrides", "manual completion table; default: built-in"},
};
constexpr Flag kIngestFlags[] = {
    {"findings-dir", "directory with one sub-directory of analyzer output per repository"},
    {"joern-manifest", "Joern query id to CWE table"},
    {"scanner-map", "scanner category to CWE table"},
    {"dedup", "deduplication key: location or cwe-level"},
    {"threads", "ingest worker threads; 0 = all cores"},
};
constexpr Flag kSurfaceFlags[] = {
    {"surface-map", "CWE to threat-surface table; default: built-in"},
    {"chain-threshold", "minimum co-occurrence percentage reported as a chain"},
};
constexpr Flag kReportFlags[] = {
    {"format", "report format: delimited or json"},
};
constexpr Flag kHarvestFlags[] = {
    {"query", "search query"},
    {"page-limit", "maximum result pages"},
    {"replay", "recorded responses to replay instead of the network"},
    {"rules", "exclusion rules table; default: built-in"},
    {"snapshot-time", "timestamp recorded in the manifest"},
    {"api-base", "search service base URL"},
};

struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::string config_file;
  bool render = false;
  bool live = false;
};

template <std::size_t N>
void add_flags(Command& cmd, const Flag (&flags)[N]) {
  for (const auto& f : flags)
    cmd.app->add_option(std::string("--") + f.key, cmd.values[f.key], f.help);
}

int report_failure(mcprisk_status status) {
  std::fprintf(stderr, "mcprisk: %s error: %s\n", mcprisk_status_name(status), mcprisk_last_error());
  return mcprisk_exit_code(status);
}

/// Builds a configuration from the flags that were given, then lets --config
/// override them.
mcprisk_config* build_config(Command& cmd, mcprisk_status* status) {
  mcprisk_config* config = nullptr;
  if ((*status = mcprisk_config_create(&config)) != MCPRISK_OK)
    return nullptr;
  auto fail = [&](mcprisk_status s) {
    *status = s;
    mcprisk_config_destroy(config);
    return nullptr;
  };
  for (const auto& [key, value] : cmd.values) {
    if (cmd.app->count("--" + key) == 0)
      continue;
    if (auto s = mcprisk_config_set(config, key.c_str(), value.c_str()); s != MCPRISK_OK)
      return fail(s);
  }
  if (cmd.render)
    if (auto s = mcprisk_config_set(config, "render", "true"); s != MCPRISK_OK)
      return fail(s);
  if (cmd.live)
    if (auto s = mcprisk_config_set(config, "live", "true"); s != MCPRISK_OK)
      return fail(s);
  if (!cmd.config_file.empty())
    if (auto s = mcprisk_config_load_file(config, cmd.config_file.c_str()); s != MCPRISK_OK)
      return fail(s);
  return config;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metadata-driven security risk scoring for MCP server repositories"};
  app.set_version_flag("--version", mcprisk_version());
  app.require_subcommand(1);

  std::map<std::string, Command> commands;
  auto make = [&](const char* name, const char* help) -> Command& {
    Command& c = commands[name];
    c.app = app.add_subcommand(name, help);
    c.app->add_option("--out", c.values["out"], "output directory (harvest: manifest file)");
    c.app->add_option("--config", c.config_file, "JSON configuration; its values override flags")
        ->check(CLI::ExistingFile);
    return c;
  };

  Command& catalog = make("catalog", "parse catalogs and compute the CWE Risk Index");
  add_flags(catalog, kCatalogFlags);
  Command& ingest = make("ingest", "normalize and deduplicate analyzer findings");
  add_flags(ingest, kIngestFlags);
  make("score", "repository scores and risk bands");
  Command& surf = make("surfaces", "threat-surface shares and co-occurrence");
  add_flags(surf, kSurfaceFlags);
  Command& report = make("report", "per-figure data files and optional charts");
  add_flags(report, kReportFlags);
  report.app->add_option("--surface-map", report.values["surface-map"], "CWE to threat-surface table");
  report.app->add_flag("--render", report.render, "also write SVG charts");
  Command& run = make("run", "the whole pipeline");
  add_flags(run, kCatalogFlags);
  add_flags(run, kIngestFlags);
  add_flags(run, kSurfaceFlags);
  add_flags(run, kReportFlags);
  run.app->add_flag("--render", run.render, "also write SVG charts");
  Command& harvest = make("harvest", "collect candidate repositories from the search service");
  add_flags(harvest, kHarvestFlags);
  harvest.app->add_flag("--live", harvest.live, "query the live service (token in MCP_RISK_TOKEN)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (auto& [name, cmd] : commands) {
    if (!cmd.app->parsed())
      continue;
    mcprisk_status status = MCPRISK_OK;
    mcprisk_config* config = build_config(cmd, &status);
    if (config == nullptr)
      return report_failure(status);

    if (name == "harvest") {
      mcprisk_harvest_summary summary{};
      status = mcprisk_run_harvest(config, &summary);
      if (status == MCPRISK_OK)
        std::printf("fetched %zu, retained %zu, excluded %zu, warnings %zu\n", summary.fetched, summary.retained,
                    summary.excluded, summary.warnings);
    } else if (name == "catalog") {
      status = mcprisk_run_catalog(config);
    } else if (name == "ingest") {
      status = mcprisk_run_ingest(config);
    } else if (name == "score") {
      status = mcprisk_run_score(config);
    } else if (name == "surfaces") {
      status = mcprisk_run_surfaces(config);
    } else if (name == "report") {
      status = mcprisk_run_report(config);
    } else {
      status = mcprisk_run_pipeline(config);
    }
    mcprisk_config_destroy(config);
    return status == MCPRISK_OK ? 0 : report_failure(status);
  }
  return 2;
}
