#ifndef JUNCTEST_H
#define JUNCTEST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum JtStatus {
  JT_STATUS_OK = 0,
  JT_STATUS_NULL_POINTER = 1,
  JT_STATUS_INVALID_UTF8 = 2,
  JT_STATUS_PARSE = 3,
  JT_STATUS_INVALID = 4,
  JT_STATUS_NOT_FOUND = 5,
  JT_STATUS_INTERNAL = 6,
} JtStatus;

typedef enum JtPolicy {
  JT_POLICY_OBLIVIOUS = 0,
  JT_POLICY_REACTIVE_BRAKE = 1,
} JtPolicy;

/**
 * Maneuver instances of one junction.
 */
typedef struct JtCatalog JtCatalog;

/**
 * A validated road map.
 */
typedef struct JtRoadMap JtRoadMap;

/**
 * A set of logical scenarios.
 */
typedef struct JtScenarioSet JtScenarioSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *jt_last_error_message(void);

/**
 * Releases a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void jt_string_free(char *s);

/**
 * Parses and validates a road map document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum JtStatus jt_road_map_from_json(const char *json, struct JtRoadMap **out);

/**
 * Loads one of the built-in maps ("T1", "X1", "Y1").
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum JtStatus jt_road_map_builtin(const char *name, struct JtRoadMap **out);

/**
 * # Safety
 * `map` must come from this library and not have been freed. NULL is ignored.
 */
void jt_road_map_free(struct JtRoadMap *map);

/**
 * Enumerates the maneuver instances of a junction.
 *
 * # Safety
 * Pointers must be valid; `junction` NUL-terminated.
 */
enum JtStatus jt_catalog_new(const struct JtRoadMap *map,
                             const char *junction,
                             struct JtCatalog **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum JtStatus jt_catalog_len(const struct JtCatalog *catalog, size_t *out);

/**
 * Id of the `index`-th maneuver instance, as a new string.
 *
 * # Safety
 * Pointers must be valid.
 */
enum JtStatus jt_catalog_id(const struct JtCatalog *catalog, size_t index, char **out);

/**
 * # Safety
 * `catalog` must come from this library and not have been freed. NULL is ignored.
 */
void jt_catalog_free(struct JtCatalog *catalog);

/**
 * All dangerous `n_actors`-tuples of the catalog, ego first.
 *
 * # Safety
 * Pointers must be valid.
 */
enum JtStatus jt_find_logical_scenarios(const struct JtCatalog *catalog,
                                        size_t n_actors,
                                        struct JtScenarioSet **out);

/**
 * A new set with one representative per (ego, multiset of externals).
 *
 * # Safety
 * Pointers must be valid.
 */
enum JtStatus jt_reduce_symmetries(const struct JtScenarioSet *set, struct JtScenarioSet **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum JtStatus jt_scenario_set_len(const struct JtScenarioSet *set, size_t *out);

/**
 * # Safety
 * Pointers must be valid. Free the result with [`jt_string_free`].
 */
enum JtStatus jt_scenario_set_to_json(const struct JtScenarioSet *set, char **out);

/**
 * # Safety
 * `set` must come from this library and not have been freed. NULL is ignored.
 */
void jt_scenario_set_free(struct JtScenarioSet *set);

/**
 * Concretizes every scenario of `set` with default settings and speed profiles.
 * Writes a JSON array of concrete scenarios and, if `out_eligible` is not NULL,
 * the number that passed the static check.
 *
 * # Safety
 * `map`, `catalog`, `set` and `out_json` must be valid; `out_eligible` may be NULL.
 */
enum JtStatus jt_concretize(const struct JtRoadMap *map,
                            const struct JtCatalog *catalog,
                            const struct JtScenarioSet *set,
                            char **out_json,
                            size_t *out_eligible);

/**
 * Simulates one concrete scenario (a JSON object as produced by [`jt_concretize`])
 * and writes the trace as JSON lines.
 *
 * # Safety
 * `scenario_json` must be NUL-terminated; `out_jsonl` must be writable.
 */
enum JtStatus jt_simulate(const char *scenario_json,
                          enum JtPolicy policy,
                          uint64_t seed,
                          char **out_jsonl);

/**
 * Two-sided Fisher exact p-value of [[a, b], [c, d]].
 *
 * # Safety
 * `out` must be writable.
 */
enum JtStatus jt_fisher_exact(uint64_t a, uint64_t b, uint64_t c, uint64_t d, double *out);

/**
 * Odds ratio of [[a, b], [c, d]], with 0.5 added to every cell when one is zero.
 *
 * # Safety
 * `out` must be writable.
 */
enum JtStatus jt_odds_ratio(uint64_t a, uint64_t b, uint64_t c, uint64_t d, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JUNCTEST_H */
