#ifndef TRAJMATCH_H
#define TRAJMATCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TmStatus {
  TM_STATUS_OK = 0,
  TM_STATUS_NULL_POINTER = 1,
  TM_STATUS_INVALID_INPUT = 2,
  TM_STATUS_BUDGET_EXCEEDED = 3,
  TM_STATUS_INTERNAL = 4,
} TmStatus;

typedef enum TmMethod {
  TM_METHOD_EXACT = 0,
  TM_METHOD_MEANFIELD = 1,
  TM_METHOD_ICM = 2,
} TmMethod;

/**
 * An event graph of atomic motions.
 */
typedef struct TmGraph TmGraph;

/**
 * The result of matching two graphs.
 */
typedef struct TmReport TmReport;

/**
 * A scene of entity tracks.
 */
typedef struct TmScene TmScene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *tm_version(void);

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next `tm_*` call on the same thread.
 */
const char *tm_last_error_message(void);

/**
 * Load a scene from a trajectory CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TmStatus tm_scene_from_csv(const char *path, struct TmScene **out);

/**
 * Build a scene from `n` samples given as parallel arrays. Samples are
 * grouped by entity and point id in order of first appearance and sorted by
 * frame.
 *
 * # Safety
 * Every array must hold `n` elements; ids must be NUL-terminated strings.
 */
enum TmStatus tm_scene_from_samples(size_t n,
                                    const char *const *entity_ids,
                                    const char *const *point_ids,
                                    const int64_t *frames,
                                    const double *xs,
                                    const double *ys,
                                    struct TmScene **out);

/**
 * # Safety
 * `scene` must come from a `tm_scene_*` constructor or be NULL.
 */
void tm_scene_free(struct TmScene *scene);

/**
 * # Safety
 * `scene` must be a live handle; `out` must be writable.
 */
enum TmStatus tm_scene_trajectory_count(const struct TmScene *scene, size_t *out);

/**
 * Normalize and segment a scene and build its event graph. `config_json`
 * holds pipeline parameters as JSON, or NULL for the defaults.
 *
 * # Safety
 * `scene` must be a live handle; `config_json` NULL or NUL-terminated; `out` writable.
 */
enum TmStatus tm_scene_segment(const struct TmScene *scene,
                               const char *config_json,
                               struct TmGraph **out);

/**
 * # Safety
 * `graph` must come from `tm_scene_segment` or be NULL.
 */
void tm_graph_free(struct TmGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum TmStatus tm_graph_node_count(const struct TmGraph *graph, size_t *out);

/**
 * The graph's nodes and edges as JSON.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum TmStatus tm_graph_to_json(const struct TmGraph *graph, char **out);

/**
 * Similarity of observation `query` to model `model`. `config_json` holds
 * pipeline parameters as JSON, or NULL; `method` overrides its method.
 *
 * # Safety
 * Handles must be live; `config_json` NULL or NUL-terminated; `out` writable.
 */
enum TmStatus tm_match(const struct TmGraph *query,
                       const struct TmGraph *model,
                       enum TmMethod method,
                       const char *config_json,
                       struct TmReport **out);

/**
 * # Safety
 * `report` must come from `tm_match` or be NULL.
 */
void tm_report_free(struct TmReport *report);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum TmStatus tm_report_log_similarity(const struct TmReport *report, double *out);

/**
 * Number of observed nodes in the report's mapping.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum TmStatus tm_report_mapping_len(const struct TmReport *report, size_t *out);

/**
 * Copy the 0-based mapping into `buf`, which must hold `len` entries, with
 * `len` equal to `tm_report_mapping_len`.
 *
 * # Safety
 * `report` must be a live handle; `buf` must hold `len` writable entries.
 */
enum TmStatus tm_report_mapping(const struct TmReport *report, size_t *buf, size_t len);

/**
 * The full report as JSON.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum TmStatus tm_report_to_json(const struct TmReport *report, char **out);

/**
 * # Safety
 * `s` must come from a `tm_*_to_json` call or be NULL.
 */
void tm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRAJMATCH_H */
