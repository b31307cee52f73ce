#ifndef COOPLOC_H
#define COOPLOC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. 1–3 match the exit codes of the `cooploc` binary.
 */
typedef enum CooplocStatus {
  COOPLOC_STATUS_OK = 0,
  /**
   * Bad input, config or trajectory file.
   */
  COOPLOC_STATUS_INVALID = 1,
  /**
   * A least-squares system lost full column rank.
   */
  COOPLOC_STATUS_RANK_DEFICIENT = 2,
  COOPLOC_STATUS_IO = 3,
  COOPLOC_STATUS_NULL_POINTER = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  COOPLOC_STATUS_INTERNAL = 5,
} CooplocStatus;

typedef enum CooplocMethod {
  COOPLOC_METHOD_GPS = 0,
  COOPLOC_METHOD_GR_CL = 1,
  COOPLOC_METHOD_GLRR_CL = 2,
} CooplocMethod;

/**
 * Parsed experiment configuration.
 */
typedef struct CooplocConfig CooplocConfig;

/**
 * Connectivity graph of one tick.
 */
typedef struct CooplocGraph CooplocGraph;

/**
 * Result of a Monte-Carlo experiment.
 */
typedef struct CooplocOutcome CooplocOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cooploc_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *cooploc_last_error(void);

/**
 * Parses TOML config text. `base_dir` may be NULL; otherwise relative
 * `trajectory_file` paths resolve against it.
 *
 * # Safety
 * `text` and non-null `base_dir` must be NUL-terminated strings; `out`
 * must be writable.
 */
enum CooplocStatus cooploc_config_from_toml(const char *text,
                                            const char *base_dir,
                                            struct CooplocConfig **out);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum CooplocStatus cooploc_config_set_seed(struct CooplocConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum CooplocStatus cooploc_config_set_trials(struct CooplocConfig *config, size_t trials);

/**
 * # Safety
 * `config` must be NULL or a handle not yet freed.
 */
void cooploc_config_free(struct CooplocConfig *config);

/**
 * Runs every trial of the experiment.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum CooplocStatus cooploc_experiment_run(const struct CooplocConfig *config,
                                          struct CooplocOutcome **out);

/**
 * Pooled mean squared localization error of `method`, in m².
 *
 * # Safety
 * `outcome` must be a live handle, `method` one of the declared
 * constants and `out` writable.
 */
enum CooplocStatus cooploc_outcome_msle(const struct CooplocOutcome *outcome,
                                        enum CooplocMethod method,
                                        double *out);

/**
 * Mean per-trial error reduction of `method` versus GPS, in percent.
 *
 * # Safety
 * `outcome` must be a live handle, `method` one of the declared
 * constants and `out` writable.
 */
enum CooplocStatus cooploc_outcome_reduction(const struct CooplocOutcome *outcome,
                                             enum CooplocMethod method,
                                             double *out);

/**
 * Number of squared-error samples behind the `method` report, 0 if the
 * method was not run.
 *
 * # Safety
 * `outcome` must be NULL or a live handle and `method` one of the
 * declared constants.
 */
size_t cooploc_outcome_sample_count(const struct CooplocOutcome *outcome,
                                    enum CooplocMethod method);

/**
 * Writes the CDF files and `summary.json` into `dir`.
 *
 * # Safety
 * Both handles must be live; `dir` must be a NUL-terminated string.
 */
enum CooplocStatus cooploc_outcome_write(const struct CooplocOutcome *outcome,
                                         const struct CooplocConfig *config,
                                         const char *dir);

/**
 * # Safety
 * `outcome` must be NULL or a handle not yet freed.
 */
void cooploc_outcome_free(struct CooplocOutcome *outcome);

/**
 * Builds the range-limited, degree-capped connectivity graph of `n`
 * vehicles.
 *
 * # Safety
 * `xs` and `ys` must point to `n` doubles; `out` must be writable.
 */
enum CooplocStatus cooploc_graph_build(const double *xs,
                                       const double *ys,
                                       size_t n,
                                       double radius,
                                       size_t max_degree,
                                       struct CooplocGraph **out);

/**
 * Graph from an explicit edge list of `edge_count` `(i, j)` pairs stored
 * flat in `pairs`.
 *
 * # Safety
 * `pairs` must point to `2 * edge_count` values; `out` must be writable.
 */
enum CooplocStatus cooploc_graph_from_edges(size_t n,
                                            const size_t *pairs,
                                            size_t edge_count,
                                            struct CooplocGraph **out);

/**
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t cooploc_graph_vertex_count(const struct CooplocGraph *graph);

/**
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t cooploc_graph_edge_count(const struct CooplocGraph *graph);

/**
 * Copies the sorted edge list as flat `(i, j)` pairs with `i < j`.
 * `capacity` counts pairs, so `pairs` must hold `2 * capacity` values.
 *
 * # Safety
 * `graph` must be live; `pairs` must be writable for `2 * capacity` values.
 */
enum CooplocStatus cooploc_graph_edges(const struct CooplocGraph *graph,
                                       size_t *pairs,
                                       size_t capacity);

/**
 * # Safety
 * `graph` must be NULL or a handle not yet freed.
 */
void cooploc_graph_free(struct CooplocGraph *graph);

/**
 * One GR-CL tick with every vehicle anchored on its GPS fix.
 *
 * `ranges` and `azimuths` hold `2 * edge_count` entries: for edge `k` of
 * [`cooploc_graph_edges`] as `(i, j)`, entry `2k` is measured by `i` of `j`
 * and entry `2k + 1` by `j` of `i`. Azimuths are radians clockwise from +y.
 * Singleton vehicles keep their GPS fix.
 *
 * # Safety
 * `gps_x`, `gps_y`, `out_x`, `out_y` must hold `vertex_count` doubles;
 * `ranges` and `azimuths` must hold `2 * edge_count` doubles.
 */
enum CooplocStatus cooploc_grcl_localize(const struct CooplocGraph *graph,
                                         const double *gps_x,
                                         const double *gps_y,
                                         const double *ranges,
                                         const double *azimuths,
                                         double *out_x,
                                         double *out_y);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COOPLOC_H */
