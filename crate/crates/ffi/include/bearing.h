#ifndef BEARING_H
#define BEARING_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>

// Result code of every fallible call.
typedef enum BearingStatus {
  BEARING_STATUS_OK = 0,
  BEARING_STATUS_NULL_POINTER = 1,
  // Malformed graph, configuration, sizes or scenario fields.
  BEARING_STATUS_INVALID_INPUT = 2,
  // Coincident points or a degenerate configuration.
  BEARING_STATUS_DEGENERATE = 3,
  // Missing, non-unit or inconsistent bearings.
  BEARING_STATUS_INVALID_BEARINGS = 4,
  // Singular follower block, too few anchors or a disconnected graph.
  BEARING_STATUS_SINGULAR = 5,
  BEARING_STATUS_PARSE = 6,
  BEARING_STATUS_IO = 7,
  BEARING_STATUS_INTEGRATOR = 8,
  // Output buffer shorter than the reported required length.
  BEARING_STATUS_BUFFER_TOO_SMALL = 9,
  BEARING_STATUS_PANIC = 10,
} BearingStatus;

// Opaque graph plus configuration.
typedef struct BearingFramework BearingFramework;

// Opaque undirected graph.
typedef struct BearingGraph BearingGraph;

// Opaque run report.
typedef struct BearingReport BearingReport;

// Opaque validated scenario.
typedef struct BearingScenario BearingScenario;

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *bearing_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *bearing_version(void);

// Builds a graph on `n` vertices from `m` edges given as `2m` vertex
// indices.
//
// # Safety
// `edges` must point to `2 * m` values (may be null when `m == 0`) and
// `out` to writable storage for one pointer.
enum BearingStatus bearing_graph_new(size_t n,
                                     const size_t *edges,
                                     size_t m,
                                     struct BearingGraph **out);

// # Safety
// `graph` must come from [`bearing_graph_new`] and not be used afterwards.
void bearing_graph_free(struct BearingGraph *graph);

// Edge count after canonical ordering.
//
// # Safety
// `graph` must be a live handle or null.
size_t bearing_graph_edge_count(const struct BearingGraph *graph);

// Framework from a graph and `len = n * d` stacked coordinates. The graph
// is copied; the caller keeps ownership of it.
//
// # Safety
// `graph` must be live, `coords` must hold `len` values and `out` must be
// writable.
enum BearingStatus bearing_framework_new(const struct BearingGraph *graph,
                                         size_t d,
                                         const double *coords,
                                         size_t len,
                                         struct BearingFramework **out);

// # Safety
// `fw` must come from [`bearing_framework_new`] and not be used afterwards.
void bearing_framework_free(struct BearingFramework *fw);

// Rank of the bearing rigidity matrix, the rank required for
// infinitesimal rigidity, and the verdict.
//
// # Safety
// `fw` must be live; output pointers may be null to skip them.
enum BearingStatus bearing_framework_rigidity(const struct BearingFramework *fw,
                                              size_t *rank,
                                              size_t *required_rank,
                                              bool *rigid);

// Unit bearings `m * d`, one per canonical edge (tail < head).
//
// # Safety
// `fw` must be live and `out` must hold `capacity` values.
enum BearingStatus bearing_framework_bearings(const struct BearingFramework *fw,
                                              double *out,
                                              size_t capacity,
                                              size_t *written);

// Bearing rigidity matrix, `(m d) x (n d)`, row-major.
//
// # Safety
// `fw` must be live and `out` must hold `capacity` values; `rows` and
// `cols` may be null.
enum BearingStatus bearing_framework_rigidity_matrix(const struct BearingFramework *fw,
                                                     double *out,
                                                     size_t capacity,
                                                     size_t *rows,
                                                     size_t *cols);

// Bearing Laplacian of the framework's own bearings, `(n d) x (n d)`.
//
// # Safety
// `fw` must be live and `out` must hold `capacity` values.
enum BearingStatus bearing_framework_laplacian(const struct BearingFramework *fw,
                                               double *out,
                                               size_t capacity,
                                               size_t *written);

// Limit of the leaderless flow from `p0` toward the shape `target`
// (both `len = n * d`). Writes `len` values to `out`.
//
// # Safety
// `p0`, `target` and `out` must each hold `len` values.
enum BearingStatus bearing_predict_leaderless(size_t d,
                                              const double *p0,
                                              const double *target,
                                              size_t len,
                                              double *out);

// Limit of the leader-follower flow whose bearing constraints are those
// of `target`. Leaders `leaders[0..nl]` sit at `leader_positions`
// (`nl * d`, same order); the full `n * d` state is written to `out`.
// `feasible` (optional) receives the leader feasibility verdict.
//
// # Safety
// Buffers must hold the stated number of values.
enum BearingStatus bearing_predict_leader_follower(const struct BearingFramework *target,
                                                   const size_t *leaders,
                                                   size_t nl,
                                                   const double *leader_positions,
                                                   double *out,
                                                   size_t capacity,
                                                   bool *feasible);

// Closed-form network localization: measures bearings of `truth`, keeps
// `anchors` at their true positions and writes the estimate of the whole
// network (`n * d`) to `out`.
//
// # Safety
// Buffers must hold the stated number of values.
enum BearingStatus bearing_localize(const struct BearingFramework *truth,
                                    const size_t *anchors,
                                    size_t na,
                                    double *out,
                                    size_t capacity);

// Loads and validates a scenario file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum BearingStatus bearing_scenario_load(const char *path, struct BearingScenario **out);

// Parses and validates scenario text (TOML).
//
// # Safety
// `text` must be a NUL-terminated string and `out` writable.
enum BearingStatus bearing_scenario_parse(const char *text, struct BearingScenario **out);

// # Safety
// `s` must come from a scenario constructor and not be used afterwards.
void bearing_scenario_free(struct BearingScenario *s);

// Runs a scenario. `out_dir` may be null to skip writing files.
//
// # Safety
// `s` must be live, `out_dir` null or NUL-terminated, `out` writable.
enum BearingStatus bearing_scenario_run(const struct BearingScenario *s,
                                        const char *out_dir,
                                        struct BearingReport **out);

// Whether every assertion of the run passed; false for a null handle.
//
// # Safety
// `r` must be a live report or null.
bool bearing_report_passed(const struct BearingReport *r);

// Report as a JSON string; release it with [`bearing_string_free`].
//
// # Safety
// `r` must be live and `out` writable.
enum BearingStatus bearing_report_json(const struct BearingReport *r, char **out);

// # Safety
// `r` must come from [`bearing_scenario_run`] and not be used afterwards.
void bearing_report_free(struct BearingReport *r);

// # Safety
// `s` must be a string returned by this library, or null.
void bearing_string_free(char *s);

#endif  /* BEARING_H */
