#ifndef MICROCONTINUUM_H
#define MICROCONTINUUM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of an FFI call.
 */
typedef enum McStatus {
  MC_STATUS_OK = 0,
  MC_STATUS_NULL_POINTER = 1,
  MC_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON.
   */
  MC_STATUS_PARSE = 3,
  /**
   * Well-formed JSON that violates the scenario schema.
   */
  MC_STATUS_SCHEMA = 4,
  /**
   * Scenario rejected before running (unstable step, missing field).
   */
  MC_STATUS_INVALID = 5,
  /**
   * Non-finite values or a state leaving its admissible range.
   */
  MC_STATUS_NUMERIC_BLOW_UP = 6,
  MC_STATUS_OUT_OF_RANGE = 7,
  MC_STATUS_INTERNAL = 8,
} McStatus;

/**
 * Result of running a scenario.
 */
typedef struct McReport McReport;

/**
 * Parsed, validated scenario.
 */
typedef struct McScenario McScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty when none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *mc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mc_version(void);

/**
 * Parses and validates scenario JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum McStatus mc_scenario_parse(const char *json, struct McScenario **out);

/**
 * Built-in scenario for a regime name (`free`, `scs`, `gnr`, `material`,
 * `voids`, `mixture`, `variational`).
 *
 * # Safety
 * `regime` must be a NUL-terminated string and `out` a valid pointer.
 */
enum McStatus mc_scenario_default(const char *regime, uint64_t seed, struct McScenario **out);

/**
 * Replaces the seed of a scenario.
 *
 * # Safety
 * `scenario` must come from this library and not have been freed.
 */
enum McStatus mc_scenario_set_seed(struct McScenario *scenario, uint64_t seed);

/**
 * # Safety
 * `scenario` must come from this library or be null; it is invalid afterwards.
 */
void mc_scenario_free(struct McScenario *scenario);

/**
 * Runs a scenario. A run whose laws fail still returns `MC_STATUS_OK`; check
 * `mc_report_passed`.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
enum McStatus mc_run(const struct McScenario *scenario, struct McReport **out);

/**
 * 1 when every law passed, 0 otherwise (including a null handle).
 *
 * # Safety
 * `report` must be a live handle or null.
 */
int32_t mc_report_passed(const struct McReport *report);

/**
 * Number of law rows in the report.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
size_t mc_report_law_count(const struct McReport *report);

/**
 * Row `index`: `name` is `"<report>/<law>"` and lives as long as the report.
 * Any output pointer may be null.
 *
 * # Safety
 * `report` must be a live handle; non-null outputs must be writable.
 */
enum McStatus mc_report_law(const struct McReport *report,
                            size_t index,
                            const char **name,
                            double *linf,
                            double *tol,
                            int32_t *passed);

/**
 * Full report as JSON. Release the string with `mc_string_free`.
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum McStatus mc_report_json(const struct McReport *report, char **out);

/**
 * # Safety
 * `report` must come from this library or be null; it is invalid afterwards.
 */
void mc_report_free(struct McReport *report);

/**
 * # Safety
 * `s` must come from `mc_report_json` or be null.
 */
void mc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MICROCONTINUUM_H */
