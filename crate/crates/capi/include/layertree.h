#ifndef LAYERTREE_H
#define LAYERTREE_H

/* Generated by cbindgen from the layertree-capi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum {
  CLT_OK = 0,
  CLT_ERR_NULL_ARGUMENT = 1,
  CLT_ERR_UTF8 = 2,
  CLT_ERR_PARSE = 3,
  CLT_ERR_INVALID_ARGUMENT = 4,
} clt_status;

/**
 * Solver outcome for `clt_solve`.
 */
typedef enum {
  CLT_FEASIBLE = 0,
  CLT_INFEASIBLE = 1,
  CLT_TIMEOUT = 2,
} clt_outcome;

/**
 * Opaque instance handle.
 */
typedef struct clt_instance clt_instance;

/**
 * Opaque certificate tree handle.
 */
typedef struct clt_tree clt_tree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *clt_last_error(void);

/**
 * Parses the `clt` text format into a new instance handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
clt_status clt_instance_parse(const char *text, clt_instance **out);

/**
 * Builds an instance from arrays of length `lambda`: per-layer vertex
 * budgets and capacity intervals.
 *
 * # Safety
 * The three arrays must hold `lambda` readable elements; `out` must be a
 * valid pointer.
 */
clt_status clt_instance_new(uint64_t sources,
                            uintptr_t lambda,
                            const uint64_t *counts,
                            const uint64_t *cap_lo,
                            const uint64_t *cap_hi,
                            clt_instance **out);

/**
 * # Safety
 * `instance` must come from this library and not be freed twice.
 */
void clt_instance_free(clt_instance *instance);

/**
 * Number of sources, or 0 on a null handle.
 *
 * # Safety
 * `instance` must be a valid handle or null.
 */
uint64_t clt_instance_sources(const clt_instance *instance);

/**
 * Number of layers above the sources, or 0 on a null handle.
 *
 * # Safety
 * `instance` must be a valid handle or null.
 */
uintptr_t clt_instance_layers(const clt_instance *instance);

/**
 * Canonical `clt` text of the instance; free with `clt_string_free`.
 *
 * # Safety
 * `instance` and `out` must be valid pointers.
 */
clt_status clt_instance_to_text(const clt_instance *instance, char **out);

/**
 * Decides feasibility. `opt_set` selects the optimization set by tag
 * (`all`, `none`, `no-pareto`, ...); null means `all`. `timeout_ms` of 0
 * runs without a time limit. On a feasible outcome and a non-null
 * `out_tree`, the certificate is returned and must be freed with
 * `clt_tree_free`.
 *
 * # Safety
 * All pointers must be valid or null as documented.
 */
clt_status clt_solve(const clt_instance *instance,
                     const char *opt_set,
                     uint64_t timeout_ms,
                     clt_outcome *out_outcome,
                     clt_tree **out_tree);

/**
 * # Safety
 * `tree` must come from this library and not be freed twice.
 */
void clt_tree_free(clt_tree *tree);

/**
 * 1 when the tree is a valid certificate for the instance, 0 otherwise.
 *
 * # Safety
 * Both handles must be valid.
 */
int clt_tree_is_valid(const clt_instance *instance, const clt_tree *tree);

/**
 * Certificate tree as JSON; free with `clt_string_free`.
 *
 * # Safety
 * `tree` and `out` must be valid pointers.
 */
clt_status clt_tree_to_json(const clt_tree *tree, char **out);

/**
 * Frees strings returned by this library.
 *
 * # Safety
 * `text` must come from this library and not be freed twice.
 */
void clt_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAYERTREE_H */
