/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SCOD_H
#define SCOD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScodBackend {
  SCOD_BACKEND_EXACT = 0,
  SCOD_BACKEND_FLOAT = 1,
} ScodBackend;

typedef enum ScodOutcome {
  SCOD_OUTCOME_TERMINATED = 0,
  SCOD_OUTCOME_PERIODIC = 1,
  SCOD_OUTCOME_CONVERGENT_NON_TERMINATING = 2,
  SCOD_OUTCOME_UNDETERMINED = 3,
} ScodOutcome;

/*
 Status code returned by every entry point.
 */
typedef enum ScodStatus {
  SCOD_STATUS_OK = 0,
  SCOD_STATUS_NULL_ARGUMENT = 1,
  SCOD_STATUS_INVALID_UTF8 = 2,
  SCOD_STATUS_PARSE = 3,
  SCOD_STATUS_DIMENSION = 4,
  SCOD_STATUS_DOMAIN = 5,
  SCOD_STATUS_BACKEND = 6,
  SCOD_STATUS_CATALOG = 7,
  SCOD_STATUS_MODEL = 8,
  SCOD_STATUS_IO = 9,
  SCOD_STATUS_OUT_OF_RANGE = 10,
  SCOD_STATUS_NOT_PERIODIC = 11,
  SCOD_STATUS_PANIC = 12,
} ScodStatus;

/*
 A finished run: trajectory, classification and report.
 */
typedef struct ScodRun ScodRun;

/*
 A parsed scenario.
 */
typedef struct ScodScenario ScodScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Version of the library as a static NUL-terminated string.
 */
const char *scod_version(void);

/*
 Message of the last failed call on this thread, or NULL. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *scod_last_error_message(void);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void scod_string_free(char *s);

/*
 Parses a scenario document.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ScodStatus scod_scenario_from_json(const char *json, struct ScodScenario **out);

/*
 Builds one of the built-in scenarios by name.

 # Safety
 `name` must be a NUL-terminated string; `out` must be writable.
 */
enum ScodStatus scod_scenario_builtin(const char *name, struct ScodScenario **out);

/*
 # Safety
 `scenario` must come from this library and not have been freed. NULL is ignored.
 */
void scod_scenario_free(struct ScodScenario *scenario);

/*
 # Safety
 Pointers must be valid.
 */
enum ScodStatus scod_scenario_shape(const struct ScodScenario *scenario, size_t *n, size_t *d);

/*
 # Safety
 `scenario` must be valid.
 */
enum ScodStatus scod_scenario_set_backend(struct ScodScenario *scenario, enum ScodBackend backend);

/*
 # Safety
 `scenario` must be valid.
 */
enum ScodStatus scod_scenario_set_max_steps(struct ScodScenario *scenario, size_t max_steps);

/*
 Serializes the scenario as a document; free the result with [`scod_string_free`].

 # Safety
 Pointers must be valid.
 */
enum ScodStatus scod_scenario_to_json(const struct ScodScenario *scenario, char **out);

/*
 Simulates and analyses the scenario. When `out_dir` is not NULL the
 requested output files are written there.

 # Safety
 `scenario` must be valid, `out_dir` NULL or a NUL-terminated string,
 `out` writable.
 */
enum ScodStatus scod_run(const struct ScodScenario *scenario,
                         const char *out_dir,
                         struct ScodRun **out);

/*
 # Safety
 `run` must come from this library and not have been freed. NULL is ignored.
 */
void scod_run_free(struct ScodRun *run);

/*
 # Safety
 Pointers must be valid.
 */
enum ScodStatus scod_run_outcome(const struct ScodRun *run, enum ScodOutcome *out);

/*
 Number of recorded states, the initial state included.

 # Safety
 Pointers must be valid.
 */
enum ScodStatus scod_run_state_count(const struct ScodRun *run, size_t *out);

/*
 Offset and period of the detected cycle; `SCOD_STATUS_NOT_PERIODIC`
 when the run is not periodic.

 # Safety
 Pointers must be valid.
 */
enum ScodStatus scod_run_cycle(const struct ScodRun *run, size_t *offset, size_t *period);

/*
 Writes 1 or 0 to `out`, or -1 when the scenario carries no expectation.

 # Safety
 Pointers must be valid.
 */
enum ScodStatus scod_run_expectation_met(const struct ScodRun *run, int32_t *out);

/*
 Coordinate `coord` of `agent` (both from 0) at step `t`, as a double.

 # Safety
 Pointers must be valid.
 */
enum ScodStatus scod_run_opinion(const struct ScodRun *run,
                                 size_t t,
                                 size_t agent,
                                 size_t coord,
                                 double *out);

/*
 Same as [`scod_run_opinion`] but as text, `p/q` on the exact backend.
 Free the result with [`scod_string_free`].

 # Safety
 Pointers must be valid.
 */
enum ScodStatus scod_run_opinion_text(const struct ScodRun *run,
                                      size_t t,
                                      size_t agent,
                                      size_t coord,
                                      char **out);

/*
 The run report as JSON; free the result with [`scod_string_free`].

 # Safety
 Pointers must be valid.
 */
enum ScodStatus scod_run_report_json(const struct ScodRun *run, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCOD_H */
