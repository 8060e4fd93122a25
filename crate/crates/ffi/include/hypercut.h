/* C interface to the hypercut MaxCut toolkit. Generated by cbindgen; do not edit. */

#ifndef HYPERCUT_H
#define HYPERCUT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code returned by every fallible function.
typedef enum HcStatus {
  HcStatus_Ok = 0,
  // A required pointer argument was null.
  HcStatus_NullPointer = 1,
  // A string argument was not valid UTF-8.
  HcStatus_Utf8 = 2,
  // An argument violated the called operation's contract.
  HcStatus_InvalidArgument = 3,
  // Malformed graph text.
  HcStatus_Parse = 4,
  // Malformed binary or JSON payload.
  HcStatus_BadFormat = 5,
  HcStatus_Io = 6,
  // Training produced a non-finite quantity.
  HcStatus_PolicyCollapse = 7,
  // The call panicked; treat involved handles as poisoned.
  HcStatus_Panic = 8,
} HcStatus;

// Opaque policy-network handle. Produced by hc_train or hc_agent_load,
// released with hc_agent_free.
typedef struct HcAgent HcAgent;

// Opaque unit-vector embedding handle. Produced by hc_solve or
// hc_embedding_load, released with hc_embedding_free.
typedef struct HcEmbedding HcEmbedding;

// Opaque graph handle. Create with an hc_graph_* constructor, release with
// hc_graph_free.
typedef struct HcGraph HcGraph;

// Convergence report for one relaxation solve.
typedef struct HcSdpReport {
  // Relaxation objective at the final iterate.
  double objective;
  // Full sweeps performed.
  size_t iterations;
  // Largest column displacement in the final sweep.
  double final_delta;
  // Whether final_delta reached the tolerance before the sweep cap.
  bool converged;
} HcSdpReport;

// Batched hyperplane-rounding statistics.
typedef struct HcPgwResult {
  double avg_cut;
  int64_t max_cut;
  size_t samples;
} HcPgwResult;

// Training hyperparameters. Fill with hc_train_config_default, then adjust.
typedef struct HcTrainConfig {
  // Hidden width of the policy network.
  size_t hidden;
  // Parallel rounding chains.
  size_t chains;
  // Total environment steps.
  size_t total_steps;
  // Steps between parameter updates.
  size_t t_step;
  // Optimization epochs per update.
  size_t n_epochs;
  // Minibatch size within an update epoch.
  size_t minibatch;
  double learning_rate;
  // Surrogate clip width.
  double clip_epsilon;
  // Discount factor in the TD target.
  double gamma;
  // Seed for chains, shuffling, and network initialization.
  uint64_t seed;
  // Use Adam instead of plain gradient descent.
  bool use_adam;
  // Subtract a running mean of rewards inside TD targets.
  bool reward_baseline;
  // Suppress wall-clock measurement for byte-stable metrics.
  bool deterministic;
} HcTrainConfig;

// One training-step row; mirrors the metrics CSV columns.
typedef struct HcStepMetrics {
  size_t t;
  double avg_cut;
  int64_t max_cut;
  double mean_reward;
  double loss_ppo;
  double loss_vf;
  uint64_t wall_ms;
} HcStepMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *hc_version(void);

// Message from the most recent failing call on this thread. Never null;
// empty before the first failure. The pointer stays valid until the next
// failing call on the same thread.
const char *hc_last_error(void);

// Static human-readable name for a status code; "unknown" for values
// outside the enum.
const char *hc_status_name(int status);

// Parses Gset text: an "n m" header line, then one "i j w" line per edge,
// 1-based endpoints.
//
// # Safety
// `text` must point to a nul-terminated string and `out` to writable
// storage for one pointer. On success `*out` owns a new graph; release it
// with hc_graph_free.
enum HcStatus hc_graph_parse_gset(const char *text, struct HcGraph **out);

// Parses the JSON graph form `{"n": ..., "edges": [[i, j, w], ...]}`.
//
// # Safety
// Same contract as hc_graph_parse_gset.
enum HcStatus hc_graph_from_json(const char *text, struct HcGraph **out);

// Loads a graph file, sniffing JSON (leading '{') versus Gset text.
//
// # Safety
// `path` must be nul-terminated; `out` as in hc_graph_parse_gset.
enum HcStatus hc_graph_load(const char *path, struct HcGraph **out);

// Generates a seeded Erdos-Renyi graph with unit weights.
//
// # Safety
// `out` must point to writable storage for one pointer.
enum HcStatus hc_graph_gen_er(size_t n, double p, uint64_t seed, struct HcGraph **out);

// Node count; 0 for a null handle.
//
// # Safety
// `g` must be null or a live graph handle.
size_t hc_graph_n(const struct HcGraph *g);

// Edge count; 0 for a null handle.
//
// # Safety
// `g` must be null or a live graph handle.
size_t hc_graph_m(const struct HcGraph *g);

// Cut value of a node assignment. `values` holds one +1 or -1 per node.
//
// # Safety
// `values` must point to `len` readable bytes; `out_cut` must be writable.
enum HcStatus hc_graph_cut_value(const struct HcGraph *g,
                                 const int8_t *values,
                                 size_t len,
                                 int64_t *out_cut);

// Releases a graph handle; null is a no-op.
//
// # Safety
// `g` must be null or a pointer returned by an hc_graph_* constructor, not
// yet freed.
void hc_graph_free(struct HcGraph *g);

// Solves the low-rank relaxation. `d` is the embedding rank; pass 0 for the
// generic-optimality default. `out_report` may be null.
//
// # Safety
// `g` must be a live graph handle; `out` must be writable; `out_report`
// must be null or writable. On success `*out` owns a new embedding;
// release it with hc_embedding_free.
enum HcStatus hc_solve(const struct HcGraph *g,
                       size_t d,
                       double tol,
                       size_t max_sweeps,
                       uint64_t seed,
                       struct HcEmbedding **out,
                       struct HcSdpReport *out_report);

// Column count (one unit vector per node); 0 for a null handle.
//
// # Safety
// `e` must be null or a live embedding handle.
size_t hc_embedding_n(const struct HcEmbedding *e);

// Embedding rank; 0 for a null handle.
//
// # Safety
// `e` must be null or a live embedding handle.
size_t hc_embedding_dim(const struct HcEmbedding *e);

// Writes the embedding's binary form to a file.
//
// # Safety
// `e` must be a live embedding handle; `path` must be nul-terminated.
enum HcStatus hc_embedding_save(const struct HcEmbedding *e, const char *path);

// Loads an embedding previously written by hc_embedding_save.
//
// # Safety
// `path` must be nul-terminated; `out` must be writable. On success `*out`
// owns a new embedding.
enum HcStatus hc_embedding_load(const char *path, struct HcEmbedding **out);

// Releases an embedding handle; null is a no-op.
//
// # Safety
// `e` must be null or a pointer returned by this library, not yet freed.
void hc_embedding_free(struct HcEmbedding *e);

// Relaxation objective of an embedding for a graph.
//
// # Safety
// `g` and `e` must be live handles; `out` must be writable.
enum HcStatus hc_sdp_objective(const struct HcGraph *g, const struct HcEmbedding *e, double *out);

// Closed-form expected rounded cut of an embedding under a uniform random
// hyperplane.
//
// # Safety
// `g` and `e` must be live handles; `out` must be writable.
enum HcStatus hc_expected_cut_analytic(const struct HcGraph *g,
                                       const struct HcEmbedding *e,
                                       double *out);

// Cut obtained by rounding the embedding with the hyperplane whose normal
// is `normal` (length `len`, need not be unit).
//
// # Safety
// `normal` must point to `len` readable doubles; `out_cut` must be
// writable.
enum HcStatus hc_cut_of_normal(const struct HcGraph *g,
                               const struct HcEmbedding *e,
                               const double *normal,
                               size_t len,
                               int64_t *out_cut);

// Rounds an embedding with `b_samples` seeded random hyperplanes. When
// `incumbent_out` is non-null it receives the best assignment found, one
// +1/-1 byte per node.
//
// # Safety
// `g` and `e` must be live handles; `out_result` must be writable;
// `incumbent_out` must be null or point to at least hc_graph_n(g) writable
// bytes.
enum HcStatus hc_pgw(const struct HcGraph *g,
                     const struct HcEmbedding *e,
                     size_t b_samples,
                     uint64_t seed,
                     struct HcPgwResult *out_result,
                     int8_t *incumbent_out);

// Fills `out` with the default training hyperparameters.
//
// # Safety
// `out` must be writable.
enum HcStatus hc_train_config_default(struct HcTrainConfig *out);

// Trains the rounding agent on one graph and embedding. `out_final` may be
// null; otherwise it receives the last step's metrics (zeroed when
// total_steps is 0).
//
// # Safety
// `g` and `e` must be live handles; `config` must be readable; `out_agent`
// must be writable; `out_final` must be null or writable. On success
// `*out_agent` owns a new agent; release it with hc_agent_free.
enum HcStatus hc_train(const struct HcGraph *g,
                       const struct HcEmbedding *e,
                       const struct HcTrainConfig *config,
                       struct HcAgent **out_agent,
                       struct HcStepMetrics *out_final);

// State dimension the agent was built for; 0 for a null handle.
//
// # Safety
// `a` must be null or a live agent handle.
size_t hc_agent_d(const struct HcAgent *a);

// Hidden width of the agent's network; 0 for a null handle.
//
// # Safety
// `a` must be null or a live agent handle.
size_t hc_agent_l(const struct HcAgent *a);

// Deterministic greedy policy step: runs the network on `state` (a unit
// vector of length `len`), takes the mean action, and writes the
// normalized next state to `out_next` (also `len` doubles).
//
// # Safety
// `state` must point to `len` readable doubles and `out_next` to `len`
// writable doubles; the two may alias only exactly (equal pointers).
enum HcStatus hc_agent_mean_step(const struct HcAgent *a,
                                 const double *state,
                                 size_t len,
                                 double *out_next);

// Writes the agent's binary checkpoint form to a file.
//
// # Safety
// `a` must be a live agent handle; `path` must be nul-terminated.
enum HcStatus hc_agent_save(const struct HcAgent *a, const char *path);

// Loads an agent checkpoint previously written by hc_agent_save (or by the
// training pipeline).
//
// # Safety
// `path` must be nul-terminated; `out` must be writable. On success `*out`
// owns a new agent.
enum HcStatus hc_agent_load(const char *path, struct HcAgent **out);

// Releases an agent handle; null is a no-op.
//
// # Safety
// `a` must be null or a pointer returned by this library, not yet freed.
void hc_agent_free(struct HcAgent *a);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERCUT_H */
