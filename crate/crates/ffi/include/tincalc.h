#ifndef TINCALC_H
#define TINCALC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TincalcMethod {
  TINCALC_METHOD_NAIVE = 0,
  TINCALC_METHOD_FAST = 1,
} TincalcMethod;

typedef enum TincalcStatus {
  TINCALC_STATUS_OK = 0,
  TINCALC_STATUS_NULL_POINTER = 1,
  // Malformed TIN text or non-UTF-8 input.
  TINCALC_STATUS_PARSE = 2,
  // A single TIN is invalid (bad triangle, gap, overlap).
  TINCALC_STATUS_INVALID_TIN = 3,
  // The pair is not in general position.
  TINCALC_STATUS_DEGENERATE = 4,
  // `g` is constant in a fit; `s = 0` and `t` are still reported.
  TINCALC_STATUS_DEGENERATE_FIT = 5,
  TINCALC_STATUS_IO = 6,
  TINCALC_STATUS_INVALID_ARGUMENT = 7,
  // Internal failure (a caught panic).
  TINCALC_STATUS_INTERNAL = 8,
} TincalcStatus;

// Opaque TIN handle.
typedef struct TincalcTin TincalcTin;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses TIN text (`TIN 1` format) into a new handle.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum TincalcStatus tincalc_tin_parse(const char *text, struct TincalcTin **out);

// Reads a TIN file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum TincalcStatus tincalc_tin_read(const char *path, struct TincalcTin **out);

// A random TIN with `triangles` triangles over the unit square.
//
// # Safety
// `out` must be a valid pointer.
enum TincalcStatus tincalc_tin_generate(size_t triangles, uint64_t seed, struct TincalcTin **out);

// # Safety
// `tin` must come from this library and not be used afterwards.
void tincalc_tin_free(struct TincalcTin *tin);

// Number of triangles, or 0 for a null handle.
//
// # Safety
// `tin` must be null or a live handle.
size_t tincalc_tin_num_triangles(const struct TincalcTin *tin);

// Checks general position. Returns `DEGENERATE` with the violation count
// in `violations` (may be null) and the list in the last error.
//
// # Safety
// `f` and `g` must be live handles; `violations` null or valid.
enum TincalcStatus tincalc_validate_pair(const struct TincalcTin *f,
                                         const struct TincalcTin *g,
                                         size_t *violations);

// Exact ∬fg as a `p/q` string.
//
// # Safety
// `f`, `g` live handles; `out` a valid pointer. Free the string with
// `tincalc_string_free`.
enum TincalcStatus tincalc_inner(const struct TincalcTin *f,
                                 const struct TincalcTin *g,
                                 enum TincalcMethod method,
                                 char **out);

// `‖f − g‖₂²` exactly and `‖f − g‖₂` as a 17-digit decimal.
//
// # Safety
// As for `tincalc_inner`; both outputs must be valid pointers.
enum TincalcStatus tincalc_distance(const struct TincalcTin *f,
                                    const struct TincalcTin *g,
                                    enum TincalcMethod method,
                                    char **squared,
                                    char **decimal);

// Least-squares `s`, `t` with `f ≈ s·g + t` and the exact residual.
// Returns `DEGENERATE_FIT` (outputs still set) when `g` is constant.
//
// # Safety
// As for `tincalc_inner`; all three outputs must be valid pointers.
enum TincalcStatus tincalc_match(const struct TincalcTin *f,
                                 const struct TincalcTin *g,
                                 enum TincalcMethod method,
                                 char **s,
                                 char **t,
                                 char **residual2);

// Message for the last failed call on this thread, or null. Valid until
// the next call into the library on this thread.
const char *tincalc_last_error(void);

// # Safety
// `s` must be null or a string returned by this library.
void tincalc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TINCALC_H */
