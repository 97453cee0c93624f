#ifndef GRAPHLENS_H
#define GRAPHLENS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Aggregation choice for interpretability scores.
typedef enum GlAgg {
  GL_AGG_MAX = 0,
  GL_AGG_AVG = 1,
} GlAgg;

typedef enum GlStatus {
  GL_STATUS_OK = 0,
  GL_STATUS_NULL_POINTER = 1,
  GL_STATUS_INVALID_ARGUMENT = 2,
  GL_STATUS_PARSE_ERROR = 3,
  GL_STATUS_DATA_ERROR = 4,
  GL_STATUS_IO_ERROR = 5,
  GL_STATUS_BUFFER_TOO_SMALL = 6,
  GL_STATUS_PANIC = 7,
} GlStatus;

// Embedding handle. Rows follow the node order of the graph it was
// trained on.
typedef struct GlEmbedding GlEmbedding;

// Undirected graph handle.
typedef struct GlGraph GlGraph;

typedef struct GlGraphStats {
  size_t nodes;
  size_t edges;
  double density;
  size_t components;
} GlGraphStats;

// Walk and training settings for `gl_embed_deepwalk`.
typedef struct GlEmbedOptions {
  size_t walks_per_node;
  size_t walk_length;
  size_t dim;
  size_t window;
  size_t negatives;
  size_t epochs;
  double learning_rate;
  uint64_t seed;
  size_t workers;
} GlEmbedOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *gl_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *gl_version(void);

// Build a graph with nodes `0..num_nodes` from `len` edges `(src[i], dst[i])`.
// Duplicate edges collapse and self-loops are dropped.
//
// # Safety
// `src` and `dst` must point to `len` readable values; `out` must be writable.
enum GlStatus gl_graph_from_edges(size_t num_nodes,
                                  const uint32_t *src,
                                  const uint32_t *dst,
                                  size_t len,
                                  struct GlGraph **out);

// Load an edge list. `comma` selects comma-separated lines instead of
// whitespace.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum GlStatus gl_graph_load(const char *path, bool comma, struct GlGraph **out);

// # Safety
// `graph` must be null or a handle from this library not yet freed.
void gl_graph_free(struct GlGraph *graph);

// # Safety
// `graph` must be a live handle; `out` must be writable.
enum GlStatus gl_graph_stats(const struct GlGraph *graph, struct GlGraphStats *out);

// Louvain communities. Writes one label per node into `communities`
// (length at least the node count).
//
// # Safety
// `graph` must be a live handle; `communities` must hold `len` values;
// `modularity` and `num_communities` may be null.
enum GlStatus gl_louvain(const struct GlGraph *graph,
                         double resolution,
                         uint64_t seed,
                         uint32_t *communities,
                         size_t len,
                         double *modularity,
                         size_t *num_communities);

// Default DeepWalk settings: 80 walks of length 40, 128 dimensions.
struct GlEmbedOptions gl_embed_default_options(void);

// Generate uniform walks and train skip-gram embeddings.
//
// # Safety
// `graph` must be a live handle, `options` readable, `out` writable.
enum GlStatus gl_embed_deepwalk(const struct GlGraph *graph,
                                const struct GlEmbedOptions *options,
                                struct GlEmbedding **out);

// Wrap a caller-owned row-major matrix of `rows × dim` floats. Row `i`
// is node `i`.
//
// # Safety
// `data` must hold `rows * dim` readable floats; `out` must be writable.
enum GlStatus gl_embedding_from_data(const float *data,
                                     size_t rows,
                                     size_t dim,
                                     struct GlEmbedding **out);

// # Safety
// `embedding` must be null or a live handle.
size_t gl_embedding_rows(const struct GlEmbedding *embedding);

// # Safety
// `embedding` must be null or a live handle.
size_t gl_embedding_dim(const struct GlEmbedding *embedding);

// Copy the row-major matrix into `buf` (at least rows × dim floats).
//
// # Safety
// `embedding` must be a live handle; `buf` must hold `len` writable floats.
enum GlStatus gl_embedding_copy(const struct GlEmbedding *embedding, float *buf, size_t len);

// # Safety
// `embedding` must be null or a handle from this library not yet freed.
void gl_embedding_free(struct GlEmbedding *embedding);

// Interpretability of each dimension against a partition of the rows.
// `groups[i]` is the group of row `i`; `k` equals each group's size.
// Writes one percentage per dimension into `per_dimension`.
//
// # Safety
// `embedding` must be a live handle; `groups` must hold `len` values equal
// to the row count; `per_dimension` must hold `out_len` writable doubles.
enum GlStatus gl_interpretability(const struct GlEmbedding *embedding,
                                  const uint32_t *groups,
                                  size_t len,
                                  enum GlAgg agg1,
                                  enum GlAgg agg2,
                                  double *per_dimension,
                                  size_t out_len);

// Area under the ROC curve of `scores` against 0/1 `labels`.
//
// # Safety
// `scores` and `labels` must hold `len` values; `out` must be writable.
enum GlStatus gl_auc(const double *scores, const uint8_t *labels, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHLENS_H */
