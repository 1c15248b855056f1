/* C interface of the blendgas steady-state gas network solver. */

#ifndef BLENDGAS_H
#define BLENDGAS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define BLENDGAS_OK 0

// The network violates a structural invariant (bad data).
#define BLENDGAS_ERR_INVALID 1

// Malformed input: unreadable file, bad JSON, unknown id.
#define BLENDGAS_ERR_PARSE 2

// The network is physically infeasible (pressure drains to zero).
#define BLENDGAS_ERR_INFEASIBLE 3

// An iterative solver exhausted its budget without converging.
#define BLENDGAS_ERR_NO_CONVERGENCE 4

// A null pointer, out-of-range index, or otherwise unusable argument.
#define BLENDGAS_ERR_ARGUMENT 5

// An internal invariant failed; the handle is still safe to free.
#define BLENDGAS_ERR_INTERNAL 6

// Solver selection for `blendgas_solve`.
typedef enum BlendgasSolver {
  // Pick by graph shape: tree, single cycle, or general.
  BLENDGAS_SOLVER_AUTO = 0,
  // Exact elimination; the network must be a tree.
  BLENDGAS_SOLVER_TREE = 1,
  // Cut-and-bisect; the network must carry exactly one cycle.
  BLENDGAS_SOLVER_CUT = 2,
  // Damped least-squares iteration; any connected network.
  BLENDGAS_SOLVER_LM = 3,
} BlendgasSolver;

// Opaque handle to a validated network.
typedef struct BlendgasNetwork BlendgasNetwork;

// Opaque handle to a solved steady state.
typedef struct BlendgasSolution BlendgasSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the library as a static NUL-terminated string.
const char *blendgas_version(void);

// Message of the most recent failure on the calling thread. The pointer
// stays valid until the next failing call on the same thread; it is
// never null (an empty string means "no error recorded").
const char *blendgas_last_error_message(void);

// Load and validate a network from a JSON file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be a valid place
// to store the new handle, which the caller must eventually release
// with `blendgas_network_free`.
int32_t blendgas_network_load_file(const char *path, struct BlendgasNetwork **out);

// Parse and validate a network from an in-memory JSON document.
//
// # Safety
// As `blendgas_network_load_file`, with `json` the document text.
int32_t blendgas_network_load_json(const char *json, struct BlendgasNetwork **out);

// Release a network handle. Null is ignored.
//
// # Safety
// `net` must be a handle obtained from a `blendgas_network_load_*`
// call that has not been freed before.
void blendgas_network_free(struct BlendgasNetwork *net);

// Number of nodes, or 0 for a null handle.
//
// # Safety
// `net` must be null or a live network handle.
size_t blendgas_network_node_count(const struct BlendgasNetwork *net);

// Number of edges, or 0 for a null handle.
//
// # Safety
// `net` must be null or a live network handle.
size_t blendgas_network_edge_count(const struct BlendgasNetwork *net);

// Number of independent cycles, or 0 for a null handle.
//
// # Safety
// `net` must be null or a live network handle.
size_t blendgas_network_cycle_count(const struct BlendgasNetwork *net);

// Compute the steady state of a network.
//
// `tol_p` is the bisection tolerance on the pressure gap (pass 0 for
// the default 1e-10); `max_iter` the iteration budget (pass 0 for the
// default: 200 bisections or 500 least-squares steps).
//
// # Safety
// `net` must be a live network handle; `out` must be a valid place to
// store the new handle, which the caller must eventually release with
// `blendgas_solution_free`.
int32_t blendgas_solve(const struct BlendgasNetwork *net,
                       enum BlendgasSolver solver,
                       double tol_p,
                       size_t max_iter,
                       struct BlendgasSolution **out);

// Release a solution handle. Null is ignored.
//
// # Safety
// `sol` must be a handle obtained from `blendgas_solve` that has not
// been freed before.
void blendgas_solution_free(struct BlendgasSolution *sol);

// Name of the solver that produced the state ("tree", "cut", or "lm"),
// or null for a null handle.
//
// # Safety
// `sol` must be null or a live solution handle.
const char *blendgas_solution_solver(const struct BlendgasSolution *sol);

// Iterations the solver spent (0 for the direct tree solver).
//
// # Safety
// `sol` must be null or a live solution handle.
size_t blendgas_solution_iterations(const struct BlendgasSolution *sol);

// Max-norm of the steady-state residual of the reported state.
//
// # Safety
// `sol` must be null or a live solution handle; `out` must be writable.
int32_t blendgas_solution_residual_max(const struct BlendgasSolution *sol, double *out);

// Cycle transfer λ* of a cut-solver run; NaN for other solvers.
//
// # Safety
// `sol` must be null or a live solution handle; `out` must be writable.
int32_t blendgas_solution_lambda_star(const struct BlendgasSolution *sol, double *out);

// Boundary composition μ* of a cut-solver run; NaN for other solvers.
//
// # Safety
// `sol` must be null or a live solution handle; `out` must be writable.
int32_t blendgas_solution_mu_star(const struct BlendgasSolution *sol, double *out);

// Number of nodes in the solution, or 0 for a null handle.
//
// # Safety
// `sol` must be null or a live solution handle.
size_t blendgas_solution_node_count(const struct BlendgasSolution *sol);

// Number of edges in the solution, or 0 for a null handle.
//
// # Safety
// `sol` must be null or a live solution handle.
size_t blendgas_solution_edge_count(const struct BlendgasSolution *sol);

// Id of the node at `index`, or null when out of range. The pointer
// borrows the handle.
//
// # Safety
// `sol` must be null or a live solution handle.
const char *blendgas_solution_node_id(const struct BlendgasSolution *sol, size_t index);

// Id of the edge at `index`, or null when out of range. The pointer
// borrows the handle.
//
// # Safety
// `sol` must be null or a live solution handle.
const char *blendgas_solution_edge_id(const struct BlendgasSolution *sol, size_t index);

// Look up a node index by id.
//
// # Safety
// `sol` must be null or a live solution handle; `id` NUL-terminated;
// `out` writable.
int32_t blendgas_solution_node_index(const struct BlendgasSolution *sol,
                                     const char *id,
                                     size_t *out);

// Look up an edge index by id.
//
// # Safety
// `sol` must be null or a live solution handle; `id` NUL-terminated;
// `out` writable.
int32_t blendgas_solution_edge_index(const struct BlendgasSolution *sol,
                                     const char *id,
                                     size_t *out);

// Hydrogen fraction at the node at `index`.
//
// # Safety
// `sol` must be null or a live solution handle; `out` must be writable.
int32_t blendgas_solution_node_eta(const struct BlendgasSolution *sol, size_t index, double *out);

// Pressure at the node at `index`.
//
// # Safety
// `sol` must be null or a live solution handle; `out` must be writable.
int32_t blendgas_solution_node_pressure(const struct BlendgasSolution *sol,
                                        size_t index,
                                        double *out);

// Squared pressure at the node at `index`.
//
// # Safety
// `sol` must be null or a live solution handle; `out` must be writable.
int32_t blendgas_solution_node_pressure_squared(const struct BlendgasSolution *sol,
                                                size_t index,
                                                double *out);

// Signed flow on the edge at `index` (positive foot → head).
//
// # Safety
// `sol` must be null or a live solution handle; `out` must be writable.
int32_t blendgas_solution_edge_flow(const struct BlendgasSolution *sol, size_t index, double *out);

// Hydrogen fraction of the gas travelling through the edge at `index`.
//
// # Safety
// `sol` must be null or a live solution handle; `out` must be writable.
int32_t blendgas_solution_edge_eta(const struct BlendgasSolution *sol, size_t index, double *out);

// Number of solver warnings attached to the solution.
//
// # Safety
// `sol` must be null or a live solution handle.
size_t blendgas_solution_warning_count(const struct BlendgasSolution *sol);

// Warning text at `index`, or null when out of range. The pointer
// borrows the handle.
//
// # Safety
// `sol` must be null or a live solution handle.
const char *blendgas_solution_warning(const struct BlendgasSolution *sol, size_t index);

// Serialize the full run report to a JSON string. Returns null on
// failure; release the string with `blendgas_string_free`.
//
// # Safety
// `sol` must be null or a live solution handle.
char *blendgas_solution_to_json(const struct BlendgasSolution *sol);

// Release a string returned by `blendgas_solution_to_json`. Null is
// ignored.
//
// # Safety
// `s` must be null or an owned string obtained from this library that
// has not been freed before.
void blendgas_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLENDGAS_H */
