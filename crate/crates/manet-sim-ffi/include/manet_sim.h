#ifndef MANET_SIM_H
#define MANET_SIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible API call.
 */
typedef enum MsStatus {
  MsOk = 0,
  MsNullPointer = 1,
  MsInvalidUtf8 = 2,
  MsParseError = 3,
  MsUnknownName = 4,
  MsInvalidArgument = 5,
  MsUnreachable = 6,
  MsNumericalError = 7,
} MsStatus;

/**
 * Opaque scenario handle; create with `ms_scenario_parse` or
 * `ms_scenario_builtin`, release with `ms_scenario_free`.
 */
typedef struct MsScenario MsScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer is
 * valid until the next failing call on the same thread; never free it.
 */
const char *ms_last_error(void);

/**
 * Frees a string previously returned through an output parameter.
 * Passing NULL is a no-op.
 */
void ms_string_free(char *s);

/**
 * Parses scenario-file text into a new handle.
 */
enum MsStatus ms_scenario_parse(const char *text, struct MsScenario **out);

/**
 * Creates a handle for a built-in scenario such as `paper-6node`.
 */
enum MsStatus ms_scenario_builtin(const char *name, struct MsScenario **out);

/**
 * Releases a scenario handle. Passing NULL is a no-op.
 */
void ms_scenario_free(struct MsScenario *scenario);

/**
 * Serializes the scenario back to its file format.
 */
enum MsStatus ms_scenario_print(const struct MsScenario *scenario, char **out);

/**
 * Runs the scenario for every seed and returns the time-binned metrics
 * CSV (header line included). `protocol` is `"randwalk"` or `"aodv"`;
 * `bin_width_us` is the bin width in microseconds.
 */
enum MsStatus ms_simulate_csv(const struct MsScenario *scenario,
                              const char *protocol,
                              const uint64_t *seeds,
                              uintptr_t n_seeds,
                              uint64_t bin_width_us,
                              char **out);

/**
 * Exact expected hop count of a uniform random walk from `src` to
 * `dst` on the graph given as a row-major `n`-by-`n` 0/1 adjacency
 * matrix.
 */
enum MsStatus ms_hitting_time(const uint8_t *adjacency,
                              uintptr_t n,
                              uintptr_t src,
                              uintptr_t dst,
                              double *out);

/**
 * Partial sums of the expected-walk-length series for a mean neighbor
 * count and `k` distance-CDF values; writes `k` sums into `out`.
 */
enum MsStatus ms_walk_series(double expected_neighbors,
                             const double *cdf,
                             uintptr_t k,
                             double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MANET_SIM_H */
