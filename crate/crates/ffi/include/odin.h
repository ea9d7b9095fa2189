#ifndef ODIN_H
#define ODIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OdinStatus {
  ODIN_STATUS_OK = 0,
  ODIN_STATUS_NULL_POINTER = 1,
  ODIN_STATUS_INVALID_ARGUMENT = 2,
  ODIN_STATUS_PARSE = 3,
  ODIN_STATUS_IO = 4,
  // A vertex id past the graph, or an output buffer that is too small.
  ODIN_STATUS_OUT_OF_RANGE = 5,
  ODIN_STATUS_CORRUPT = 6,
  ODIN_STATUS_PANIC = 7,
} OdinStatus;

// A road graph. Immutable once built.
typedef struct OdinGraph OdinGraph;

// The elastic index over one graph and one object population.
typedef struct OdinIndex OdinIndex;

// A continuous kNN query registered on one index.
typedef struct OdinQuery OdinQuery;

// An object sitting `delta` past `vertex`.
typedef struct OdinPlacement {
  uint32_t object;
  uint32_t vertex;
  uint64_t delta;
} OdinPlacement;

// Where an object is after a round. `present == false` retires it.
typedef struct OdinMove {
  uint32_t object;
  bool present;
  uint32_t vertex;
  uint64_t delta;
} OdinMove;

typedef struct OdinReport {
  size_t folds;
  size_t unfolds;
  size_t first_activations;
  size_t nodes_touched;
} OdinReport;

typedef struct OdinNeighbor {
  uint32_t object;
  uint64_t distance;
} OdinNeighbor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next call into the library on the same thread.
const char *odin_last_error(void);

// Builds a graph from `edge_count` undirected edges `(from[i], to[i], weight[i])`.
//
// # Safety
// The three arrays must hold `edge_count` elements; `out` must be writable.
enum OdinStatus odin_graph_from_edges(uint32_t vertex_count,
                                      const uint32_t *from,
                                      const uint32_t *to,
                                      const uint32_t *weight,
                                      size_t edge_count,
                                      struct OdinGraph **out);

// Loads a DIMACS `.gr` file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum OdinStatus odin_graph_load_dimacs(const char *path, struct OdinGraph **out);

// A connected synthetic road-like graph.
//
// # Safety
// `out` must be writable.
enum OdinStatus odin_graph_synthetic(uint32_t vertex_count, uint64_t seed, struct OdinGraph **out);

// # Safety
// `graph` must be a live handle or null.
uint32_t odin_graph_vertex_count(const struct OdinGraph *graph);

// # Safety
// `graph` must be a live handle or null.
size_t odin_graph_edge_count(const struct OdinGraph *graph);

// # Safety
// `graph` must come from this library and not be used afterwards.
void odin_graph_free(struct OdinGraph *graph);

// Partitions `graph` with fanout `m` and leaf size `z`, places the objects
// and builds the index with underfill threshold `mu`.
//
// # Safety
// `graph` must be a live handle, `objects` must hold `object_count`
// elements, `out` must be writable.
enum OdinStatus odin_index_build(const struct OdinGraph *graph,
                                 uint32_t m,
                                 uint32_t z,
                                 uint32_t mu,
                                 const struct OdinPlacement *objects,
                                 size_t object_count,
                                 struct OdinIndex **out);

// Applies one round of object movement, then folds and unfolds as needed.
// Objects not mentioned stay put; unknown objects with `present` are added.
//
// # Safety
// `index` must be a live handle, `moves` must hold `move_count` elements and
// `report` must be writable or null.
enum OdinStatus odin_index_apply(struct OdinIndex *index,
                                 const struct OdinMove *moves,
                                 size_t move_count,
                                 struct OdinReport *report);

// # Safety
// `index` must be a live handle or null.
size_t odin_index_object_count(const struct OdinIndex *index);

// # Safety
// `index` must come from this library and not be used afterwards.
void odin_index_free(struct OdinIndex *index);

// Registers a k-nearest-neighbor query at `vertex`.
//
// # Safety
// `index` must be a live handle and `out` writable.
enum OdinStatus odin_query_new(const struct OdinIndex *index,
                               uint32_t vertex,
                               uint32_t k,
                               struct OdinQuery **out);

// Answers the query on the index's current snapshot, reusing the previous
// round when there is one. Neighbors are written nearest first. `len`
// receives the answer size; if it exceeds `capacity` nothing is written and
// `ODIN_STATUS_OUT_OF_RANGE` is returned, but the round still counts.
//
// # Safety
// `query` and `index` must be live handles, `out` must hold `capacity`
// elements (or be null with `capacity == 0`) and `len` must be writable.
enum OdinStatus odin_query_step(struct OdinQuery *query,
                                const struct OdinIndex *index,
                                struct OdinNeighbor *out,
                                size_t capacity,
                                size_t *len);

// # Safety
// `query` must come from this library and not be used afterwards.
void odin_query_free(struct OdinQuery *query);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ODIN_H */
