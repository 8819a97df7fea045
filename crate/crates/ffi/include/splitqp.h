#ifndef SPLITQP_H
#define SPLITQP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SplitqpStatus {
  SPLITQP_STATUS_OK = 0,
  SPLITQP_STATUS_NULL_POINTER = 1,
  SPLITQP_STATUS_INVALID_UTF8 = 2,
  SPLITQP_STATUS_PARSE = 3,
  SPLITQP_STATUS_INVALID_ARGUMENT = 4,
  SPLITQP_STATUS_INFEASIBLE = 5,
  SPLITQP_STATUS_SOLVER_FAILURE = 6,
  SPLITQP_STATUS_BUFFER_TOO_SMALL = 7,
  SPLITQP_STATUS_PANIC = 8,
} SplitqpStatus;

/**
 * Solver configuration.
 */
typedef struct SplitqpConfig SplitqpConfig;

/**
 * A binary quadratic program.
 */
typedef struct SplitqpProblem SplitqpProblem;

/**
 * Result of a solve.
 */
typedef struct SplitqpReport SplitqpReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *splitqp_last_error(void);

/**
 * Parses a problem from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SplitqpStatus splitqp_problem_from_json(const char *json, struct SplitqpProblem **out);

/**
 * # Safety
 * `problem` must come from [`splitqp_problem_from_json`] and not be freed
 * already; null is ignored.
 */
void splitqp_problem_free(struct SplitqpProblem *problem);

/**
 * # Safety
 * `problem` must be a live handle; `out` must be writable.
 */
enum SplitqpStatus splitqp_problem_num_vars(const struct SplitqpProblem *problem, size_t *out);

/**
 * Cost of the assignment `bits[0..len]` (each 0 or 1).
 *
 * # Safety
 * `problem` must be a live handle, `bits` must point to `len` readable
 * bytes and `out` must be writable.
 */
enum SplitqpStatus splitqp_problem_evaluate(const struct SplitqpProblem *problem,
                                            const uint8_t *bits,
                                            size_t len,
                                            double *out);

/**
 * Default configuration with `k` parts and a deterministic unlimited
 * subsolver budget.
 *
 * # Safety
 * `out` must be writable.
 */
enum SplitqpStatus splitqp_config_new(size_t k, struct SplitqpConfig **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SplitqpStatus splitqp_config_from_json(const char *json, struct SplitqpConfig **out);

/**
 * # Safety
 * `config` must be a live handle or null.
 */
void splitqp_config_free(struct SplitqpConfig *config);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum SplitqpStatus splitqp_config_set_seed(struct SplitqpConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum SplitqpStatus splitqp_config_set_iterations(struct SplitqpConfig *config, size_t n_iter);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum SplitqpStatus splitqp_config_set_workers(struct SplitqpConfig *config, size_t workers);

/**
 * Subsolver search limits; 0 leaves the corresponding limit off.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum SplitqpStatus splitqp_config_set_budget(struct SplitqpConfig *config,
                                             uint64_t node_budget,
                                             double wall_limit_s);

/**
 * `name` is one of `exhaustive`, `branch_bound`, `greedy`.
 *
 * # Safety
 * `config` must be a live handle; `name` a NUL-terminated string.
 */
enum SplitqpStatus splitqp_config_set_subsolver(struct SplitqpConfig *config, const char *name);

/**
 * `name` is one of `auto`, `single_flip`, `double_flip`, `both`, `none`.
 *
 * # Safety
 * `config` must be a live handle; `name` a NUL-terminated string.
 */
enum SplitqpStatus splitqp_config_set_sweep(struct SplitqpConfig *config, const char *name);

/**
 * # Safety
 * `problem` and `config` must be live handles; `out` must be writable.
 */
enum SplitqpStatus splitqp_solve(const struct SplitqpProblem *problem,
                                 const struct SplitqpConfig *config,
                                 struct SplitqpReport **out);

/**
 * # Safety
 * `report` must be a live handle or null.
 */
void splitqp_report_free(struct SplitqpReport *report);

/**
 * Cost of the best assignment under the solved objective.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum SplitqpStatus splitqp_report_best_cost(const struct SplitqpReport *report, double *out);

/**
 * Whether the best assignment satisfies every constraint.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum SplitqpStatus splitqp_report_feasible(const struct SplitqpReport *report, bool *out);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum SplitqpStatus splitqp_report_iterations(const struct SplitqpReport *report, size_t *out);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum SplitqpStatus splitqp_report_num_vars(const struct SplitqpReport *report, size_t *out);

/**
 * Copies the best assignment into `buf`, which must hold `num_vars` bytes.
 *
 * # Safety
 * `report` must be a live handle; `buf` must point to `len` writable bytes.
 */
enum SplitqpStatus splitqp_report_copy_assignment(const struct SplitqpReport *report,
                                                  uint8_t *buf,
                                                  size_t len);

/**
 * Full report as JSON; free the string with [`splitqp_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum SplitqpStatus splitqp_report_to_json(const struct SplitqpReport *report, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed already; null is ignored.
 */
void splitqp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPLITQP_H */
