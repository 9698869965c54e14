#ifndef WASM_TAINT_H
#define WASM_TAINT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define WT_I32 0

#define WT_I64 1

/**
 * Result code of every fallible call.
 */
typedef enum WtStatus {
  WT_OK = 0,
  WT_NULL_ARGUMENT = 1,
  WT_INVALID_UTF8 = 2,
  /**
   * Bad magic, unsupported version, malformed section or unknown opcode.
   */
  WT_MALFORMED = 3,
  /**
   * Well-formed but uses an unsupported feature such as imports.
   */
  WT_UNSUPPORTED = 4,
  WT_EXPORT_NOT_FOUND = 5,
  WT_ARITY_MISMATCH = 6,
  WT_TYPE_MISMATCH = 7,
  /**
   * Execution or instantiation trapped; the message starts with the trap's short name.
   */
  WT_TRAP = 8,
  /**
   * Unknown type tag or a taint mask bit beyond the argument count.
   */
  WT_BAD_ARGUMENT = 9,
  /**
   * No completed invocation, or result index out of range.
   */
  WT_NO_RESULT = 10,
  WT_PANIC = 11,
} WtStatus;

/**
 * Instance plus the outcome of its most recent successful invocation.
 */
typedef struct WtInstance WtInstance;

/**
 * Decoded module.
 */
typedef struct WtModule WtModule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread. Valid until the next
 * failing call; never null.
 */
const char *wt_last_error(void);

/**
 * Decodes `len` bytes into a new module stored in `*out`.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes and `out` must be writable.
 */
enum WtStatus wt_module_decode(const uint8_t *bytes, size_t len, struct WtModule **out);

/**
 * # Safety
 * `module` must be null or a handle from [`wt_module_decode`] not yet freed.
 */
void wt_module_free(struct WtModule *module);

/**
 * Instantiates `module`, running its start function. A `max_call_depth` of
 * 0 selects the default. The module handle stays owned by the caller and
 * may be freed independently of the instance.
 *
 * # Safety
 * `module` must be a live module handle and `out` must be writable.
 */
enum WtStatus wt_instance_new(const struct WtModule *module,
                              size_t max_call_depth,
                              struct WtInstance **out);

/**
 * # Safety
 * `instance` must be null or a handle from [`wt_instance_new`] not yet freed.
 */
void wt_instance_free(struct WtInstance *instance);

/**
 * Invokes the export `name` with `nargs` arguments. `types[i]` is
 * [`WT_I32`] or [`WT_I64`]; i32 arguments take the low 32 bits of
 * `values[i]`. Bit `i` of `taint_mask` marks argument `i` as a taint source.
 * On success the results replace those of any earlier invocation.
 *
 * # Safety
 * `instance` must be a live handle, `name` a NUL-terminated string, and
 * `types`/`values` must each point to `nargs` elements (may be null when
 * `nargs` is 0).
 */
enum WtStatus wt_invoke(struct WtInstance *instance,
                        const char *name,
                        const uint8_t *types,
                        const int64_t *values,
                        size_t nargs,
                        uint64_t taint_mask);

/**
 * Number of results of the last successful invocation, or 0 if none.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t wt_result_count(const struct WtInstance *instance);

/**
 * Reads result `index` of the last successful invocation. The value is
 * sign-extended to 64 bits. `direct`/`indirect` receive the source bit
 * masks of the result's taint label. Any out pointer may be null.
 *
 * # Safety
 * `instance` must be a live handle; non-null out pointers must be writable.
 */
enum WtStatus wt_result(const struct WtInstance *instance,
                        size_t index,
                        uint8_t *ty,
                        int64_t *value,
                        uint64_t *direct,
                        uint64_t *indirect);

/**
 * JSON taint report of the last successful invocation, or null if there is
 * none. Release with [`wt_string_free`].
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
char *wt_report_json(const struct WtInstance *instance);

/**
 * Number of linear-memory bytes whose shadow label is non-empty.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
uint64_t wt_tainted_bytes(const struct WtInstance *instance);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void wt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WASM_TAINT_H */
