#ifndef TOPONAV_H
#define TOPONAV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Why an episode failed.
 */
typedef enum ToponavFailure {
  TOPONAV_FAILURE_NONE = 0,
  TOPONAV_FAILURE_TIMEOUT = 1,
  TOPONAV_FAILURE_COLLISION_LIMIT = 2,
  TOPONAV_FAILURE_STUCK = 3,
} ToponavFailure;

/**
 * Status codes returned by every fallible function.
 */
typedef enum ToponavStatus {
  TOPONAV_STATUS_OK = 0,
  /**
   * The call succeeded but there is no path between the vertices.
   */
  TOPONAV_STATUS_NO_PATH = 1,
  TOPONAV_STATUS_NULL_POINTER = -1,
  TOPONAV_STATUS_INVALID_ARGUMENT = -2,
  TOPONAV_STATUS_LOAD = -3,
  TOPONAV_STATUS_NOT_FOUND = -4,
  TOPONAV_STATUS_IO = -5,
  TOPONAV_STATUS_BUFFER_TOO_SMALL = -6,
  TOPONAV_STATUS_CONFIG = -7,
  TOPONAV_STATUS_RUNTIME = -8,
  TOPONAV_STATUS_PANIC = -99,
} ToponavStatus;

/**
 * A prepared experiment: world, oracle, built graph and test set.
 */
typedef struct ToponavExperiment ToponavExperiment;

/**
 * A topological graph with its trajectory pool and build parameters.
 */
typedef struct ToponavGraph ToponavGraph;

typedef struct ToponavEpisodeResult {
  bool success;
  enum ToponavFailure failure;
  uint32_t steps;
  uint32_t collisions;
  uint32_t edges_traversed;
  uint32_t maintenance_events;
  double final_x;
  double final_y;
  double final_theta;
  double final_pos_error;
  double final_yaw_error;
} ToponavEpisodeResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *toponav_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *toponav_version(void);

/**
 * Twist-norm distance of the waypoint `(dx, dy, dtheta)`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum ToponavStatus toponav_waypoint_distance(double dx,
                                             double dy,
                                             double dtheta,
                                             double *out_distance);

/**
 * Length of the shortest forward Dubins path between two poses.
 *
 * # Safety
 * `out_length` must be null or valid for writes.
 */
enum ToponavStatus toponav_dubins_length(double ax,
                                         double ay,
                                         double atheta,
                                         double bx,
                                         double by,
                                         double btheta,
                                         double turn_radius,
                                         double *out_length);

/**
 * Posterior edge existence probability after one traversal attempt.
 *
 * # Safety
 * `out_p` must be null or valid for writes.
 */
enum ToponavStatus toponav_bayes_update(double p,
                                        bool succeeded,
                                        double p_s_given_r1,
                                        double p_s_given_r0,
                                        double *out_p);

/**
 * Fuses an observed traversal distance into an edge's Gaussian weight.
 *
 * # Safety
 * `out_mu` and `out_sigma2` must be null or valid for writes.
 */
enum ToponavStatus toponav_gaussian_update(double mu,
                                           double sigma2_edge,
                                           double d_obs,
                                           double sigma2_obs,
                                           double *out_mu,
                                           double *out_sigma2);

/**
 * Loads a graph file.
 *
 * # Safety
 * `path` must be null or a NUL-terminated string; `out_graph` must be null
 * or valid for writes.
 */
enum ToponavStatus toponav_graph_load(const char *path, struct ToponavGraph **out_graph);

/**
 * Writes a graph file.
 *
 * # Safety
 * `graph` must be null or a live handle; `path` null or NUL-terminated.
 */
enum ToponavStatus toponav_graph_save(const struct ToponavGraph *graph, const char *path);

/**
 * Releases a graph handle. Null is ignored.
 *
 * # Safety
 * `graph` must be null or a handle not yet freed.
 */
void toponav_graph_free(struct ToponavGraph *graph);

/**
 * Vertex count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t toponav_graph_vertex_count(const struct ToponavGraph *graph);

/**
 * Edge count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t toponav_graph_edge_count(const struct ToponavGraph *graph);

/**
 * Least-cost path from `start` to `goal`.
 *
 * On `Ok` the vertex ids are written to `out_path` and their number to
 * `out_len`. If `capacity` is too small, returns `BufferTooSmall` with the
 * required length in `out_len`. Returns `NoPath` with `out_len` = 0 when the
 * goal is unreachable.
 *
 * # Safety
 * `graph` must be null or a live handle; `out_path` must be null or valid
 * for `capacity` writes; `out_len` null or valid for writes.
 */
enum ToponavStatus toponav_graph_plan(const struct ToponavGraph *graph,
                                      uint64_t start,
                                      uint64_t goal,
                                      uint64_t *out_path,
                                      size_t capacity,
                                      size_t *out_len);

/**
 * Prepares an experiment from TOML configuration text (null means all
 * defaults) and a master seed.
 *
 * # Safety
 * `config_toml` must be null or NUL-terminated; `out_experiment` null or
 * valid for writes.
 */
enum ToponavStatus toponav_experiment_new(const char *config_toml,
                                          uint64_t seed,
                                          struct ToponavExperiment **out_experiment);

/**
 * Releases an experiment handle. Null is ignored.
 *
 * # Safety
 * `experiment` must be null or a handle not yet freed.
 */
void toponav_experiment_free(struct ToponavExperiment *experiment);

/**
 * Copy of the experiment's current graph as a new graph handle.
 *
 * # Safety
 * `experiment` must be null or a live handle; `out_graph` null or valid for
 * writes.
 */
enum ToponavStatus toponav_experiment_graph(const struct ToponavExperiment *experiment,
                                            struct ToponavGraph **out_graph);

/**
 * Success rate of the frozen graph on the static test set.
 *
 * # Safety
 * `experiment` must be null or a live handle; `out_success_rate` null or
 * valid for writes.
 */
enum ToponavStatus toponav_experiment_evaluate(const struct ToponavExperiment *experiment,
                                               double *out_success_rate);

/**
 * Runs one episode from `(x, y, theta)` to vertex `goal`. With `maintain`
 * the experiment's graph is updated in place.
 *
 * # Safety
 * `experiment` must be null or a live handle; `out_result` null or valid for
 * writes.
 */
enum ToponavStatus toponav_experiment_run_episode(struct ToponavExperiment *experiment,
                                                  double x,
                                                  double y,
                                                  double theta,
                                                  uint64_t goal,
                                                  bool maintain,
                                                  struct ToponavEpisodeResult *out_result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPONAV_H */
