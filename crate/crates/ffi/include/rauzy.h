#ifndef RAUZY_H
#define RAUZY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result codes. The first five agree with the exit codes of the `rauzy`
// command line tool.
typedef enum RauzyStatus {
  RAUZY_STATUS_OK = 0,
  // Unreadable or malformed input, including invalid UTF-8.
  RAUZY_STATUS_PARSE = 1,
  // Input violates a precondition or a numeric routine failed.
  RAUZY_STATUS_INVALID = 2,
  // A resource cap was hit.
  RAUZY_STATUS_RESOURCE = 3,
  // No balanced prefix pair was found.
  RAUZY_STATUS_EMPTY_INTERSECTION = 4,
  RAUZY_STATUS_NULL_POINTER = 5,
  // The output buffer is too small.
  RAUZY_STATUS_BUFFER_TOO_SMALL = 6,
  RAUZY_STATUS_PANIC = 7,
} RauzyStatus;

// Opaque block morphism handle.
typedef struct RauzyMorphism RauzyMorphism;

// Opaque substitution handle.
typedef struct RauzySubstitution RauzySubstitution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *rauzy_last_error(void);

// Parses rules such as `"a -> ab\nb -> ac\nc -> a"`.
//
// # Safety
// `text` must be NULL or a NUL-terminated string; `out` must be NULL or
// writable.
enum RauzyStatus rauzy_substitution_parse(const char *text, struct RauzySubstitution **out);

// # Safety
// `sub` must be NULL or a handle from [`rauzy_substitution_parse`] that
// has not been freed.
void rauzy_substitution_free(struct RauzySubstitution *sub);

// Alphabet size, or 0 for NULL.
//
// # Safety
// `sub` must be NULL or a live handle.
uintptr_t rauzy_substitution_dim(const struct RauzySubstitution *sub);

// Characteristic polynomial of the incidence matrix, lowest degree first.
// `*len` receives the number of coefficients (dimension + 1) even when
// `capacity` is too small.
//
// # Safety
// `coeffs` must have room for `capacity` values; `len` must be writable.
enum RauzyStatus rauzy_char_poly(const struct RauzySubstitution *sub,
                                 int64_t *coeffs,
                                 uintptr_t capacity,
                                 uintptr_t *len);

// Dominant eigenvalue of the incidence matrix.
//
// # Safety
// `sub` must be a live handle and `beta` writable.
enum RauzyStatus rauzy_beta(const struct RauzySubstitution *sub, double tolerance, double *beta);

// Block morphism generating the common points of two substitutions.
// A cap of 0 selects the default. On anything but `RAUZY_STATUS_OK`,
// `*out` is set to NULL.
//
// # Safety
// `first`, `second` must be live handles; `out` must be writable.
enum RauzyStatus rauzy_intersect(const struct RauzySubstitution *first,
                                 const struct RauzySubstitution *second,
                                 uintptr_t seed_cap,
                                 uintptr_t block_len_cap,
                                 uintptr_t block_count_cap,
                                 struct RauzyMorphism **out);

// # Safety
// `m` must be NULL or a live handle from [`rauzy_intersect`].
void rauzy_morphism_free(struct RauzyMorphism *m);

// Number of blocks, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
uintptr_t rauzy_morphism_block_count(const struct RauzyMorphism *m);

// Text form of the morphism (`block A = a | a`, `phi A -> AB` lines).
// Free the result with [`rauzy_string_free`].
//
// # Safety
// `m` must be a live handle and `out` writable.
enum RauzyStatus rauzy_morphism_to_text(const struct RauzyMorphism *m, char **out);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void rauzy_string_free(char *s);

// Renders the Rauzy fractal from `points` prefixes as a binary PPM file
// image. Free the buffer with [`rauzy_buffer_free`].
//
// # Safety
// `sub` must be a live handle; `data` and `len` must be writable.
enum RauzyStatus rauzy_render_ppm(const struct RauzySubstitution *sub,
                                  uintptr_t points,
                                  uintptr_t width,
                                  uintptr_t height,
                                  bool subtiles,
                                  uint8_t **data,
                                  uintptr_t *len);

// # Safety
// `data` and `len` must come from one call to [`rauzy_render_ppm`].
void rauzy_buffer_free(uint8_t *data, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAUZY_H */
