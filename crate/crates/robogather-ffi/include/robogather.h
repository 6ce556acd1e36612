#ifndef ROBOGATHER_H
#define ROBOGATHER_H

/* Generated by cbindgen from crates/robogather-ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum RgStatus {
  RG_STATUS_OK = 0,
  RG_STATUS_NULL_POINTER = 1,
  RG_STATUS_INVALID_UTF8 = 2,
  RG_STATUS_SCENARIO = 3,
  RG_STATUS_RUN = 4,
  RG_STATUS_IO = 5,
  RG_STATUS_OUT_OF_RANGE = 6,
  RG_STATUS_PANIC = 7,
} RgStatus;

typedef enum RgOutcomeKind {
  RG_OUTCOME_KIND_STRONG_GATHERED = 0,
  RG_OUTCOME_KIND_WEAK_GATHERED = 1,
  RG_OUTCOME_KIND_RECURRENCE = 2,
  RG_OUTCOME_KIND_BUDGET_EXHAUSTED = 3,
} RgOutcomeKind;

/**
 * Opaque run result handle.
 */
typedef struct RgRun RgRun;

/**
 * Opaque scenario handle.
 */
typedef struct RgScenario RgScenario;

/**
 * Classified end of a run. `step` is the gathering step or the first step of the
 * recurring state; `period` is non-zero only for recurrences.
 */
typedef struct RgOutcome {
  enum RgOutcomeKind kind;
  uint64_t step;
  uint64_t period;
} RgOutcome;

typedef struct RgStats {
  uint64_t runs;
  uint64_t successes;
  double mean_steps;
  double stddev;
  double ci_half_width;
  uint64_t recurrences;
  uint64_t budget_exhausted;
} RgStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a scenario file's text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum RgStatus rg_scenario_from_toml(const char *toml, struct RgScenario **out);

/**
 * Loads a built-in scenario by name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum RgStatus rg_scenario_from_catalog(const char *name, struct RgScenario **out);

/**
 * # Safety
 * `scenario` must be a live handle.
 */
enum RgStatus rg_scenario_set_seed(struct RgScenario *scenario, uint64_t seed);

/**
 * # Safety
 * `scenario` must be a live handle.
 */
enum RgStatus rg_scenario_set_max_steps(struct RgScenario *scenario, uint64_t max_steps);

/**
 * Number of robots in the scenario, or 0 for a null handle.
 *
 * # Safety
 * `scenario` must be null or a live handle.
 */
size_t rg_scenario_robot_count(const struct RgScenario *scenario);

/**
 * # Safety
 * `scenario` must be null or a handle not yet freed.
 */
void rg_scenario_free(struct RgScenario *scenario);

/**
 * Runs the scenario to completion.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be valid for writes.
 */
enum RgStatus rg_run(const struct RgScenario *scenario, struct RgRun **out);

/**
 * # Safety
 * `result` must be a live handle; `out` must be valid for writes.
 */
enum RgStatus rg_run_outcome(const struct RgRun *result, struct RgOutcome *out);

/**
 * Steps executed, or 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
uint64_t rg_run_steps(const struct RgRun *result);

/**
 * Final position of robot `index`.
 *
 * # Safety
 * `result` must be a live handle; `x` and `y` must be valid for writes.
 */
enum RgStatus rg_run_final_position(const struct RgRun *result, size_t index, double *x, double *y);

/**
 * Writes the run's trace as CSV to `path`.
 *
 * # Safety
 * `result` must be a live handle; `path` must be a NUL-terminated string.
 */
enum RgStatus rg_run_write_trace(const struct RgRun *result, const char *path);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void rg_run_free(struct RgRun *result);

/**
 * Repeats the scenario with seeds `seed + i·stride` and aggregates the outcomes.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be valid for writes.
 */
enum RgStatus rg_monte_carlo(const struct RgScenario *scenario,
                             size_t repeats,
                             uint64_t stride,
                             struct RgStats *out);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated, truncated
 * to `len`). Returns the full message length without the terminator; 0 if none.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes of writes.
 */
size_t rg_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBOGATHER_H */
