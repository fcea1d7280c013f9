/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the mcprisk library. Every function that can fail returns an
 * mcprisk_status; on failure a message is available from mcprisk_last_error()
 * on the same thread until the next call into the library.
 */
#ifndef MCPRISK_H
#define MCPRISK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32) && defined(MCPRISK_BUILDING)
#define MCPRISK_API __declspec(dllexport)
#elif defined(_WIN32)
#define MCPRISK_API __declspec(dllimport)
#elif defined(__GNUC__)
#define MCPRISK_API __attribute__((visibility("default")))
#else
#define MCPRISK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mcprisk_status {
  MCPRISK_OK = 0,
  MCPRISK_E_USAGE = 1,
  MCPRISK_E_CONFIG = 2,
  MCPRISK_E_PARSE = 3,
  MCPRISK_E_SCORING = 4,
  MCPRISK_E_INTEGRITY = 5,
  MCPRISK_E_IO = 6,
  MCPRISK_E_AUTH = 7,
  MCPRISK_E_RATE_LIMIT = 8,
  MCPRISK_E_NETWORK = 9,
  MCPRISK_E_SCHEMA = 10,
  MCPRISK_E_NOT_FOUND = 11,
  MCPRISK_E_INTERNAL = 12
} mcprisk_status;

MCPRISK_API const char* mcprisk_version(void);
MCPRISK_API const char* mcprisk_status_name(mcprisk_status status);
/* Message of the last failure on this thread; "" when none. */
MCPRISK_API const char* mcprisk_last_error(void);
/* Process exit code for a status: 0 ok, 2 configuration/usage, 3 parse,
 * 4 scoring, 1 anything else. */
MCPRISK_API int mcprisk_exit_code(mcprisk_status status);

/* ---- Configuration ------------------------------------------------------ */

typedef struct mcprisk_config mcprisk_config;

MCPRISK_API mcprisk_status mcprisk_config_create(mcprisk_config** out);
MCPRISK_API void mcprisk_config_destroy(mcprisk_config* config);
/* Keys are the CLI flag names without dashes: "cwe-xml", "capec-xml",
 * "overrides", "surface-map", "joern-manifest", "scanner-map",
 * "findings-dir", "out", "dedup", "format", "chain-threshold", "render",
 * "threads", and for harvest "query", "page-limit", "replay", "live",
 * "rules", "snapshot-time", "api-base". */
MCPRISK_API mcprisk_status mcprisk_config_set(mcprisk_config* config, const char* key, const char* value);
/* Applies every key of a JSON object file. Relative paths are resolved
 * against the file's directory. */
MCPRISK_API mcprisk_status mcprisk_config_load_file(mcprisk_config* config, const char* path);

/* ---- Stages ------------------------------------------------------------- */

MCPRISK_API mcprisk_status mcprisk_run_catalog(const mcprisk_config* config);
MCPRISK_API mcprisk_status mcprisk_run_ingest(const mcprisk_config* config);
MCPRISK_API mcprisk_status mcprisk_run_score(const mcprisk_config* config);
MCPRISK_API mcprisk_status mcprisk_run_surfaces(const mcprisk_config* config);
MCPRISK_API mcprisk_status mcprisk_run_report(const mcprisk_config* config);
/* All stages; the output directory is only touched when every stage succeeds. */
MCPRISK_API mcprisk_status mcprisk_run_pipeline(const mcprisk_config* config);
MCPRISK_API mcprisk_status mcprisk_render_charts(const char* report_dir, const char* out_dir);

typedef struct mcprisk_harvest_summary {
  size_t fetched;
  size_t retained;
  size_t excluded;
  size_t warnings;
} mcprisk_harvest_summary;

MCPRISK_API mcprisk_status mcprisk_run_harvest(const mcprisk_config* config, mcprisk_harvest_summary* summary);

/* ---- Catalog queries ---------------------------------------------------- */

typedef struct mcprisk_catalog mcprisk_catalog;

/* overrides_path may be NULL for the built-in manual completions. */
MCPRISK_API mcprisk_status mcprisk_catalog_load(const char* cwe_xml_path, const char* capec_xml_path,
                                                const char* overrides_path, mcprisk_catalog** out);
MCPRISK_API void mcprisk_catalog_destroy(mcprisk_catalog* catalog);
MCPRISK_API size_t mcprisk_catalog_weakness_count(const mcprisk_catalog* catalog);
MCPRISK_API size_t mcprisk_catalog_pattern_count(const mcprisk_catalog* catalog);
MCPRISK_API size_t mcprisk_catalog_scored_count(const mcprisk_catalog* catalog);
/* MCPRISK_E_NOT_FOUND when the CWE has no scorable pair. */
MCPRISK_API mcprisk_status mcprisk_catalog_risk_index(const mcprisk_catalog* catalog, int cwe_id, double* out);
MCPRISK_API mcprisk_status mcprisk_catalog_raw_risk(const mcprisk_catalog* catalog, int cwe_id, int64_t* out);

/* ---- Scoring primitives ------------------------------------------------- */

typedef struct mcprisk_repo_metrics {
  int64_t findings;
  double exposure;
  double rms;
  double overall;
} mcprisk_repo_metrics;

/* weights[i] is the Risk Index of a CWE found frequencies[i] times. */
MCPRISK_API mcprisk_status mcprisk_repo_metrics_compute(const double* weights, const int* frequencies, size_t n,
                                                        mcprisk_repo_metrics* out);

typedef enum mcprisk_band {
  MCPRISK_BAND_VERY_LOW = 0,
  MCPRISK_BAND_LOW = 1,
  MCPRISK_BAND_MEDIUM = 2,
  MCPRISK_BAND_HIGH = 3,
  MCPRISK_BAND_VERY_HIGH = 4,
  MCPRISK_BAND_UNSCORED = 5
} mcprisk_band;

MCPRISK_API mcprisk_status mcprisk_assign_band(double normalized, mcprisk_band* out);
MCPRISK_API const char* mcprisk_band_name(mcprisk_band band);

typedef enum mcprisk_surface {
  MCPRISK_SURFACE_TOOL = 0,
  MCPRISK_SURFACE_RESOURCE = 1,
  MCPRISK_SURFACE_PROMPT = 2,
  MCPRISK_SURFACE_PROTOCOL = 3,
  MCPRISK_SURFACE_UNMAPPED = 4
} mcprisk_surface;

/* Lookup in the built-in surface table. */
MCPRISK_API mcprisk_surface mcprisk_surface_of(int cwe_id);
MCPRISK_API const char* mcprisk_surface_name(mcprisk_surface surface);

#ifdef __cplusplus
}
#endif

#endif /* MCPRISK_H */
