#ifndef QKDNET_H
#define QKDNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QkdStatus {
  QKD_STATUS_OK = 0,
  QKD_STATUS_NULL_POINTER = 1,
  QKD_STATUS_INVALID_UTF8 = 2,
  QKD_STATUS_INVALID_CONFIG = 3,
  /**
   * The query has no answer on this network (direct link, no path).
   */
  QKD_STATUS_NO_SOLUTION = 4,
  QKD_STATUS_INVALID_ARGUMENT = 5,
  /**
   * A scheduler audit failed during a run.
   */
  QKD_STATUS_AUDIT_FAILED = 6,
  QKD_STATUS_ORACLE_REFUSED = 7,
  QKD_STATUS_INTERNAL = 8,
} QkdStatus;

/**
 * Opaque network handle.
 */
typedef struct QkdNetwork QkdNetwork;

/**
 * Opaque scheduling scenario handle.
 */
typedef struct QkdScenario QkdScenario;

/**
 * Time-averaged results of a scenario run.
 */
typedef struct QkdMetrics {
  uint64_t slots;
  double utility;
  double mean_backlog;
  /**
   * Delivered data per slot, summed over destinations.
   */
  double throughput;
  double max_queue;
  double max_key;
} QkdMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a network from a configuration document.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum QkdStatus qkd_network_from_toml(const char *toml, struct QkdNetwork **out);

/**
 * # Safety
 * `net` must be null or a handle from [`qkd_network_from_toml`] not yet freed.
 */
void qkd_network_free(struct QkdNetwork *net);

/**
 * # Safety
 * `net` must be a live handle; `nodes` and `edges` must be writable or null.
 */
enum QkdStatus qkd_network_size(const struct QkdNetwork *net, size_t *nodes, size_t *edges);

/**
 * Lexicographically least minimum vertex cut, as `{c1,c3}`, and its size.
 *
 * # Safety
 * `net` must be a live handle; `size` and `labels` must be writable.
 */
enum QkdStatus qkd_min_attack(const struct QkdNetwork *net, size_t *size, char **labels);

/**
 * Whether compromising the comma-separated nodes cuts Alice off from Bob.
 *
 * # Safety
 * `net` must be a live handle, `attack` a NUL-terminated string and `out`
 * writable.
 */
enum QkdStatus qkd_is_strongest(const struct QkdNetwork *net, const char *attack, bool *out);

/**
 * Lexicographically least Alice-Bob path avoiding the attack, as
 * `(a,c1,b)`. Returns `NoSolution` when the attack is a cut.
 *
 * # Safety
 * As [`qkd_is_strongest`]; `path` must be writable.
 */
enum QkdStatus qkd_find_secure_path(const struct QkdNetwork *net, const char *attack, char **path);

/**
 * Runs M0 with uniform `key_bits`-bit keys drawn from `seed` and reports
 * whether Alice and Bob agree.
 *
 * # Safety
 * `net` must be a live handle and `agreed` writable.
 */
enum QkdStatus qkd_m0_agree(const struct QkdNetwork *net,
                            size_t key_bits,
                            uint64_t seed,
                            bool *agreed);

/**
 * Builds a scheduling scenario from a document with a `[schedule]`
 * section, at its first `V`.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum QkdStatus qkd_scenario_from_toml(const char *toml, struct QkdScenario **out);

/**
 * # Safety
 * `sc` must be null or a handle from [`qkd_scenario_from_toml`] not yet freed.
 */
void qkd_scenario_free(struct QkdScenario *sc);

/**
 * Runs the scenario with every audit enabled.
 *
 * # Safety
 * `sc` must be a live handle and `out` writable.
 */
enum QkdStatus qkd_scenario_run(const struct QkdScenario *sc, struct QkdMetrics *out);

/**
 * Optimal long-run utility of the scenario's static benchmark.
 *
 * # Safety
 * `sc` must be a live handle and `utility` writable.
 */
enum QkdStatus qkd_scenario_oracle(const struct QkdScenario *sc, double *utility);

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *qkd_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void qkd_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* QKDNET_H */
