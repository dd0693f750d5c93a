/* C ABI for the mxsefl fair-division library. */

#ifndef MXSEFL_H
#define MXSEFL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define MXSEFL_OK 0

/**
 * Malformed input: bad JSON, failed validation, or a null pointer.
 */
#define MXSEFL_ERR_INVALID 1

/**
 * The enumeration budget was exceeded.
 */
#define MXSEFL_ERR_TOO_LARGE 2

/**
 * An internal invariant failed; this is a bug, never an unlucky input.
 */
#define MXSEFL_ERR_INVARIANT 3

/**
 * The audit completed but found an agent without MXS or EFL.
 */
#define MXSEFL_ERR_UNFAIR 4

/**
 * A solved allocation together with its replayable trace.
 */
typedef struct MxseflAllocation MxseflAllocation;

/**
 * An immutable fair-division instance.
 */
typedef struct MxseflInstance MxseflInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message of the most recent error on this thread, or an empty
 * string if no error has occurred. The pointer is owned by the library and
 * valid until the next failing call on the same thread.
 */
const char *mxsefl_last_error_message(void);

/**
 * Parses an instance from its JSON representation.
 *
 * On success writes a new handle to `out` and returns `MXSEFL_OK`; the
 * handle must be released with `mxsefl_instance_free`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer.
 */
int32_t mxsefl_instance_from_json(const char *json, struct MxseflInstance **out);

/**
 * Number of agents in the instance, or 0 if the handle is null.
 *
 * # Safety
 * `inst` must be null or a handle from `mxsefl_instance_from_json`.
 */
uintptr_t mxsefl_instance_num_agents(const struct MxseflInstance *inst);

/**
 * Number of goods in the instance, or 0 if the handle is null.
 *
 * # Safety
 * `inst` must be null or a handle from `mxsefl_instance_from_json`.
 */
uintptr_t mxsefl_instance_num_goods(const struct MxseflInstance *inst);

/**
 * Releases an instance handle. Null is a no-op.
 *
 * # Safety
 * `inst` must be null or a handle from `mxsefl_instance_from_json` that has
 * not been freed before.
 */
void mxsefl_instance_free(struct MxseflInstance *inst);

/**
 * Computes an MXS+EFL allocation for the instance.
 *
 * `enumeration_budget` bounds the partitions enumerated per share
 * computation (0 selects the default); `debug_assertions` enables the
 * per-iteration invariant checks. On success writes a new handle to `out`;
 * release it with `mxsefl_allocation_free`.
 *
 * # Safety
 * `inst` must be a live instance handle; `out` must be a valid pointer.
 */
int32_t mxsefl_solve(const struct MxseflInstance *inst,
                     uint64_t enumeration_budget,
                     bool debug_assertions,
                     struct MxseflAllocation **out);

/**
 * Serializes an allocation to JSON. The caller owns the returned string.
 *
 * # Safety
 * `alloc` must be a live allocation handle; `out` must be a valid pointer.
 */
int32_t mxsefl_allocation_to_json(const struct MxseflAllocation *alloc, char **out);

/**
 * Returns the solver trace as JSON lines. The caller owns the returned
 * string.
 *
 * # Safety
 * `alloc` must be a live allocation handle; `out` must be a valid pointer.
 */
int32_t mxsefl_allocation_trace_jsonl(const struct MxseflAllocation *alloc, char **out);

/**
 * Releases an allocation handle. Null is a no-op.
 *
 * # Safety
 * `alloc` must be null or a handle from `mxsefl_solve` that has not been
 * freed before.
 */
void mxsefl_allocation_free(struct MxseflAllocation *alloc);

/**
 * Audits an allocation against an instance and writes the report as JSON.
 *
 * The allocation is given as JSON so that externally produced allocations
 * can be audited too. Returns `MXSEFL_OK` if every agent has both MXS and
 * EFL, `MXSEFL_ERR_UNFAIR` if the audit completed with a negative verdict
 * (the report is still written), and another error code if the audit could
 * not run. `gmms_budget` bounds the group sweep (0 selects the default).
 *
 * # Safety
 * `inst` must be a live instance handle; `allocation_json` must be a valid
 * NUL-terminated string; `out` must be a valid pointer.
 */
int32_t mxsefl_audit_json(const struct MxseflInstance *inst,
                          const char *allocation_json,
                          uint64_t gmms_budget,
                          char **out);

/**
 * Releases a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string returned by this library that has not been
 * freed before.
 */
void mxsefl_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MXSEFL_H */
