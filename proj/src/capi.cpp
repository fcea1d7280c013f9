// SPDX-License-Identifier: Apache-2.0
#include "mcprisk.h"

#include <cmath>
#include <exception>
#include <new>
#include <set>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "mcprisk/catalog.hpp"
#include "mcprisk/error.hpp"
#include "mcprisk/io.hpp"
#include "mcprisk/pipeline.hpp"
#include "mcprisk/report.hpp"
#include "mcprisk/scoring.hpp"
#include "mcprisk/surfaces.hpp"

struct mcprisk_config {
  mcprisk::pipeline::PipelineConfig pipeline;
  mcprisk::pipeline::HarvestConfig harvest;
};

struct mcprisk_catalog {
  mcprisk::catalog::ScoredCatalog scored;
};

static_assert(static_cast<int>(mcprisk::ErrorKind::Usage) == MCPRISK_E_USAGE);
static_assert(static_cast<int>(mcprisk::ErrorKind::NotFound) == MCPRISK_E_NOT_FOUND);
static_assert(static_cast<int>(mcprisk::scoring::Band::Unscored) == MCPRISK_BAND_UNSCORED);
static_assert(static_cast<int>(mcprisk::surfaces::Surface::Unmapped) == MCPRISK_SURFACE_UNMAPPED);

namespace {

thread_local std::string g_last_error;

const std::set<std::string, std::less<>> kHarvestKeys{"query", "page-limit", "replay", "live",
                                                      "rules", "snapshot-time", "api-base"};
const std::set<std::string, std::less<>> kPathKeys{"cwe-xml", "capec-xml", "overrides", "surface-map",
                                                   "joern-manifest", "scanner-map", "findings-dir",
                                                   "out", "replay", "rules"};

mcprisk_status fail(mcprisk_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

/// Runs `body`, translating exceptions into a status and the thread-local
/// message.
template <typename F>
mcprisk_status guarded(F&& body) noexcept {
  g_last_error.clear();
  try {
    body();
    return MCPRISK_OK;
  } catch (const mcprisk::Error& e) {
    return fail(static_cast<mcprisk_status>(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MCPRISK_E_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MCPRISK_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MCPRISK_E_INTERNAL, e.what());
  } catch (...) {
    return fail(MCPRISK_E_INTERNAL, "unknown failure");
  }
}

void set_key(mcprisk_config& c, std::string_view key, std::string_view value) {
  if (key == "out") {
    c.pipeline.set(key, value);
    c.harvest.set(key, value);
  } else if (kHarvestKeys.contains(key)) {
    c.harvest.set(key, value);
  } else {
    c.pipeline.set(key, value);
  }
}

} // namespace

extern "C" {

const char* mcprisk_version(void) { return MCPRISK_VERSION; }

const char* mcprisk_status_name(mcprisk_status status) {
  switch (status) {
  case MCPRISK_OK: return "ok";
  case MCPRISK_E_USAGE: return "usage";
  case MCPRISK_E_CONFIG: return "config";
  case MCPRISK_E_PARSE: return "parse";
  case MCPRISK_E_SCORING: return "scoring";
  case MCPRISK_E_INTEGRITY: return "integrity";
  case MCPRISK_E_IO: return "io";
  case MCPRISK_E_AUTH: return "auth";
  case MCPRISK_E_RATE_LIMIT: return "rate_limit";
  case MCPRISK_E_NETWORK: return "network";
  case MCPRISK_E_SCHEMA: return "schema";
  case MCPRISK_E_NOT_FOUND: return "not_found";
  case MCPRISK_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* mcprisk_last_error(void) { return g_last_error.c_str(); }

int mcprisk_exit_code(mcprisk_status status) {
  switch (status) {
  case MCPRISK_OK: return 0;
  case MCPRISK_E_USAGE:
  case MCPRISK_E_CONFIG:
  case MCPRISK_E_IO:
  case MCPRISK_E_NOT_FOUND: return 2;
  case MCPRISK_E_PARSE:
  case MCPRISK_E_INTEGRITY:
  case MCPRISK_E_SCHEMA: return 3;
  case MCPRISK_E_SCORING: return 4;
  default: return 1;
  }
}

mcprisk_status mcprisk_config_create(mcprisk_config** out) {
  if (out == nullptr)
    return fail(MCPRISK_E_USAGE, "null output pointer");
  return guarded([&] { *out = new mcprisk_config(); });
}

void mcprisk_config_destroy(mcprisk_config* config) { delete config; }

mcprisk_status mcprisk_config_set(mcprisk_config* config, const char* key, const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr)
    return fail(MCPRISK_E_USAGE, "null argument");
  return guarded([&] { set_key(*config, key, value); });
}

mcprisk_status mcprisk_config_load_file(mcprisk_config* config, const char* path) {
  if (config == nullptr || path == nullptr)
    return fail(MCPRISK_E_USAGE, "null argument");
  return guarded([&] {
    const std::filesystem::path file(path);
    if (!std::filesystem::is_regular_file(file))
      throw mcprisk::Error(mcprisk::ErrorKind::Config, fmt::format("configuration file {} does not exist", path));
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(mcprisk::io::read_file(file));
    } catch (const nlohmann::json::parse_error& e) {
      throw mcprisk::Error(mcprisk::ErrorKind::Config, fmt::format("{}: not valid JSON: {}", path, e.what()));
    }
    if (!j.is_object())
      throw mcprisk::Error(mcprisk::ErrorKind::Config, fmt::format("{}: expected a JSON object", path));
    const auto base = file.parent_path();
    for (const auto& [k, v] : j.items()) {
      if (v.is_null())
        continue;
      if (v.is_object() || v.is_array())
        throw mcprisk::Error(mcprisk::ErrorKind::Config, fmt::format("{}: '{}' must be a scalar", path, k));
      std::string text = v.is_string() ? v.get<std::string>() : v.is_boolean() ? (v.get<bool>() ? "true" : "false")
                                                                               : v.dump();
      if (kPathKeys.contains(k) && !text.empty() && std::filesystem::path(text).is_relative())
        text = (base / text).lexically_normal().string();
      set_key(*config, k, text);
    }
  });
}

#define MCPRISK_STAGE(name, fn)                                                                                       \
  mcprisk_status name(const mcprisk_config* config) {                                                                 \
    if (config == nullptr)                                                                                            \
      return fail(MCPRISK_E_USAGE, "null configuration");                                                             \
    return guarded([&] { mcprisk::pipeline::fn(config->pipeline); });                                                 \
  }

MCPRISK_STAGE(mcprisk_run_catalog, run_catalog_stage)
MCPRISK_STAGE(mcprisk_run_ingest, run_ingest_stage)
MCPRISK_STAGE(mcprisk_run_score, run_score_stage)
MCPRISK_STAGE(mcprisk_run_surfaces, run_surfaces_stage)
MCPRISK_STAGE(mcprisk_run_report, run_report_stage)
MCPRISK_STAGE(mcprisk_run_pipeline, run_pipeline)

#undef MCPRISK_STAGE

mcprisk_status mcprisk_render_charts(const char* report_dir, const char* out_dir) {
  if (report_dir == nullptr || out_dir == nullptr)
    return fail(MCPRISK_E_USAGE, "null argument");
  return guarded([&] { mcprisk::report::render_charts(report_dir, out_dir); });
}

mcprisk_status mcprisk_run_harvest(const mcprisk_config* config, mcprisk_harvest_summary* summary) {
  if (config == nullptr)
    return fail(MCPRISK_E_USAGE, "null configuration");
  return guarded([&] {
    auto s = mcprisk::pipeline::run_harvest(config->harvest);
    if (summary)
      *summary = {s.fetched, s.retained, s.excluded, s.warnings};
  });
}

mcprisk_status mcprisk_catalog_load(const char* cwe_xml_path, const char* capec_xml_path, const char* overrides_path,
                                    mcprisk_catalog** out) {
  if (cwe_xml_path == nullptr || capec_xml_path == nullptr || out == nullptr)
    return fail(MCPRISK_E_USAGE, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto overrides = overrides_path ? mcprisk::catalog::parse_override_table(mcprisk::io::read_file(overrides_path))
                                    : mcprisk::catalog::default_overrides();
    auto c = std::make_unique<mcprisk_catalog>();
    c->scored = mcprisk::catalog::build_scored_catalog(mcprisk::io::read_file(cwe_xml_path),
                                                       mcprisk::io::read_file(capec_xml_path), overrides);
    *out = c.release();
  });
}

void mcprisk_catalog_destroy(mcprisk_catalog* catalog) { delete catalog; }

size_t mcprisk_catalog_weakness_count(const mcprisk_catalog* c) {
  return c ? c->scored.weaknesses.weaknesses.size() : 0;
}
size_t mcprisk_catalog_pattern_count(const mcprisk_catalog* c) { return c ? c->scored.patterns.patterns.size() : 0; }
size_t mcprisk_catalog_scored_count(const mcprisk_catalog* c) { return c ? c->scored.index.size() : 0; }

mcprisk_status mcprisk_catalog_risk_index(const mcprisk_catalog* c, int cwe_id, double* out) {
  if (c == nullptr || out == nullptr)
    return fail(MCPRISK_E_USAGE, "null argument");
  g_last_error.clear();
  auto it = c->scored.index.find(cwe_id);
  if (it == c->scored.index.end())
    return fail(MCPRISK_E_NOT_FOUND, fmt::format("CWE-{} has no Risk Index", cwe_id));
  *out = it->second.risk_index;
  return MCPRISK_OK;
}

mcprisk_status mcprisk_catalog_raw_risk(const mcprisk_catalog* c, int cwe_id, int64_t* out) {
  if (c == nullptr || out == nullptr)
    return fail(MCPRISK_E_USAGE, "null argument");
  g_last_error.clear();
  auto it = c->scored.index.find(cwe_id);
  if (it == c->scored.index.end())
    return fail(MCPRISK_E_NOT_FOUND, fmt::format("CWE-{} has no Risk Index", cwe_id));
  *out = it->second.raw_risk;
  return MCPRISK_OK;
}

mcprisk_status mcprisk_repo_metrics_compute(const double* weights, const int* frequencies, size_t n,
                                            mcprisk_repo_metrics* out) {
  if (out == nullptr || (n > 0 && (weights == nullptr || frequencies == nullptr)))
    return fail(MCPRISK_E_USAGE, "null argument");
  return guarded([&] {
    mcprisk::findings::RepoFindingProfile p;
    p.repo_id = "repository";
    mcprisk::scoring::RiskWeights w;
    for (size_t i = 0; i < n; ++i) {
      if (frequencies[i] <= 0)
        throw mcprisk::Error(mcprisk::ErrorKind::Usage, fmt::format("frequency {} is not positive", i));
      const int key = static_cast<int>(i) + 1;
      p.frequencies[key] = frequencies[i];
      p.total += frequencies[i];
      w[key] = weights[i];
    }
    out->findings = p.total;
    out->exposure = mcprisk::scoring::repo_exposure(p, w);
    out->rms = mcprisk::scoring::repo_rms(p, w);
    out->overall = mcprisk::scoring::repo_overall(p, w);
  });
}

mcprisk_status mcprisk_assign_band(double normalized, mcprisk_band* out) {
  if (out == nullptr)
    return fail(MCPRISK_E_USAGE, "null argument");
  return guarded([&] { *out = static_cast<mcprisk_band>(mcprisk::scoring::assign_band(normalized)); });
}

const char* mcprisk_band_name(mcprisk_band band) {
  if (band < MCPRISK_BAND_VERY_LOW || band > MCPRISK_BAND_UNSCORED)
    return "";
  return mcprisk::scoring::to_string(static_cast<mcprisk::scoring::Band>(band)).data();
}

mcprisk_surface mcprisk_surface_of(int cwe_id) {
  return static_cast<mcprisk_surface>(mcprisk::surfaces::map_cwe_to_surface(cwe_id));
}

const char* mcprisk_surface_name(mcprisk_surface surface) {
  if (surface < MCPRISK_SURFACE_TOOL || surface > MCPRISK_SURFACE_UNMAPPED)
    return "";
  return mcprisk::surfaces::to_string(static_cast<mcprisk::surfaces::Surface>(surface)).data();
}

} // extern "C"
