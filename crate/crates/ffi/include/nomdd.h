/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef NOMDD_H
#define NOMDD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NomddStatus {
  NOMDD_STATUS_OK = 0,
  NOMDD_STATUS_NULL_POINTER = 1,
  NOMDD_STATUS_INVALID_UTF8 = 2,
  NOMDD_STATUS_PARSE_ERROR = 3,
  NOMDD_STATUS_INVALID_ARGUMENT = 4,
  NOMDD_STATUS_INFEASIBLE = 5,
  NOMDD_STATUS_TOO_MANY_JOBS = 6,
  NOMDD_STATUS_BUFFER_TOO_SMALL = 7,
  NOMDD_STATUS_PANIC = 8,
} NomddStatus;

typedef enum NomddVariant {
  NOMDD_VARIANT_BASELINE = 0,
  NOMDD_VARIANT_RELAXED_BC = 1,
  NOMDD_VARIANT_PRECEDENCE_EXTRACTION = 2,
  NOMDD_VARIANT_EXACT_BC = 3,
} NomddVariant;

// Opaque instance handle.
typedef struct NomddInstance NomddInstance;

// Outcome of `nomdd_solve`. `best_cost` is meaningful only when
// `has_solution` is true.
typedef struct NomddSolveResult {
  uint64_t nodes;
  uint64_t failures;
  int64_t best_cost;
  bool has_solution;
  bool complete;
} NomddSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses the instance text format. On success `*out` receives a new handle.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum NomddStatus nomdd_instance_parse(const char *text, struct NomddInstance **out);

// Generates a just-in-time instance with `n` jobs.
//
// # Safety
// `out` must be a valid pointer.
enum NomddStatus nomdd_instance_generate(size_t n,
                                         uint64_t seed,
                                         uint64_t stream,
                                         struct NomddInstance **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `instance` must come from this library and not be used afterwards.
void nomdd_instance_free(struct NomddInstance *instance);

// # Safety
// `instance` must be a live handle and `out` a valid pointer.
enum NomddStatus nomdd_instance_num_jobs(const struct NomddInstance *instance, size_t *out);

// Canonical text of the instance, to be released with `nomdd_string_free`.
//
// # Safety
// `instance` must be a live handle and `out` a valid pointer.
enum NomddStatus nomdd_instance_to_text(const struct NomddInstance *instance, char **out);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void nomdd_string_free(char *s);

// Propagates the model `variant` (width is used by the relaxed variants)
// at the root and writes each job's earliest start and latest completion.
// Both arrays must hold `len >= number of jobs` entries.
//
// # Safety
// `instance` must be a live handle; `est` and `lct` must point to `len`
// writable values.
enum NomddStatus nomdd_filter_bounds(const struct NomddInstance *instance,
                                     enum NomddVariant variant,
                                     size_t width,
                                     int64_t *est,
                                     int64_t *lct,
                                     size_t len);

// Branch and bound under `variant`, stopping after `node_limit` nodes
// (0 means no limit). The best start times are written to `starts`
// (`len` entries) when a solution is found; `starts` may be null.
//
// # Safety
// `instance` must be a live handle, `result` a valid pointer, and
// `starts`, if not null, must point to `len` writable values.
enum NomddStatus nomdd_solve(const struct NomddInstance *instance,
                             enum NomddVariant variant,
                             size_t width,
                             uint64_t node_limit,
                             struct NomddSolveResult *result,
                             int64_t *starts,
                             size_t len);

// Message of the last failed call on this thread, or null after a
// successful one. Owned by the library; valid until the next call.
const char *nomdd_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOMDD_H */
