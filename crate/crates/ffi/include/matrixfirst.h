#ifndef MATRIXFIRST_H
#define MATRIXFIRST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MfStatus {
  MF_STATUS_OK = 0,
  MF_STATUS_NULL_POINTER = 1,
  MF_STATUS_INVALID_UTF8 = 2,
  MF_STATUS_PARSE = 3,
  MF_STATUS_SHAPE_MISMATCH = 4,
  MF_STATUS_DOMAIN_MISMATCH = 5,
  MF_STATUS_NOT_SQUARE = 6,
  MF_STATUS_SINGULAR = 7,
  MF_STATUS_ZERO_PIVOT = 8,
  MF_STATUS_ZERO_VECTOR = 9,
  MF_STATUS_DIMENSION_TOO_LARGE = 10,
  MF_STATUS_RANK_DEFICIENT = 11,
  MF_STATUS_NO_CONVERGENCE = 12,
  MF_STATUS_EMPTY_EIGENSPACE = 13,
  MF_STATUS_NOT_A_BASIS = 14,
  MF_STATUS_INVALID_ROW_OP = 15,
  MF_STATUS_GOAL_REACHED = 16,
  MF_STATUS_INVALID_ARGUMENT = 17,
  MF_STATUS_REPLAY_MISMATCH = 18,
  MF_STATUS_BUFFER_TOO_SMALL = 19,
  MF_STATUS_NON_FINITE = 20,
  MF_STATUS_MATH = 21,
  MF_STATUS_PANIC = 99,
} MfStatus;

typedef enum MfDomain {
  MF_DOMAIN_RATIONAL = 0,
  MF_DOMAIN_FLOAT = 1,
} MfDomain;

// Opaque matrix, rational or float.
typedef struct MfMatrix MfMatrix;

// Opaque lesson-bench session over a rational matrix.
typedef struct MfSession MfSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next library call on the same thread; do not free.
const char *mf_last_error_message(void);

// Static name of a status code, e.g. "singular_matrix".
const char *mf_status_name(enum MfStatus status);

// Frees a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void mf_string_free(char *s);

// Parses CSV rows or a JSON `{"rows","cols","data"}` object.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum MfStatus mf_matrix_parse(const char *text, enum MfDomain domain, struct MfMatrix **out);

// Float matrix from `rows * cols` row-major entries.
//
// # Safety
// `data` must point to `rows * cols` doubles; `out` must be writable.
enum MfStatus mf_matrix_from_f64(size_t rows,
                                 size_t cols,
                                 const double *data,
                                 struct MfMatrix **out);

// Exact matrix from `rows * cols` row-major integers.
//
// # Safety
// `data` must point to `rows * cols` int64 values; `out` must be writable.
enum MfStatus mf_matrix_from_i64(size_t rows,
                                 size_t cols,
                                 const int64_t *data,
                                 struct MfMatrix **out);

// Releases a matrix. NULL is ignored.
//
// # Safety
// `m` must come from this library and not have been freed.
void mf_matrix_free(struct MfMatrix *m);

// # Safety
// `m` must be a live handle; `rows`, `cols` and `domain` must be writable.
enum MfStatus mf_matrix_shape(const struct MfMatrix *m,
                              size_t *rows,
                              size_t *cols,
                              enum MfDomain *domain);

// Copies the entries, rounded to double, row-major into `buf`.
// Fails with `BUFFER_TOO_SMALL` when `len < rows * cols`.
//
// # Safety
// `m` must be a live handle; `buf` must hold `len` doubles.
enum MfStatus mf_matrix_copy_f64(const struct MfMatrix *m, double *buf, size_t len);

// JSON form `{"rows","cols","data"}`; exact entries are strings like "-3/4".
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum MfStatus mf_matrix_to_json(const struct MfMatrix *m, char **out);

// # Safety
// `m` must be a live handle; `out` must be writable.
enum MfStatus mf_rank(const struct MfMatrix *m, size_t *out);

// Determinant as text: exact "p/q" for rational matrices, a decimal for floats.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum MfStatus mf_det(const struct MfMatrix *m, char **out);

// Inverse by Gauss-Jordan, in the domain of the input.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum MfStatus mf_inverse(const struct MfMatrix *m, struct MfMatrix **out);

// Minimal polynomial of a rational matrix, as JSON
// `{"text": "x^2 - 1", "coeffs": ["-1", "0", "1"]}` with ascending coefficients.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum MfStatus mf_minpoly(const struct MfMatrix *m, char **out);

// Eigenvalues with algebraic multiplicity, `n` of them, ordered by
// descending modulus. `count` always receives `n`; when `cap < n` nothing is
// written and `BUFFER_TOO_SMALL` is returned.
//
// # Safety
// `m` must be a live handle; `re` and `im` must hold `cap` doubles.
enum MfStatus mf_eigenvalues(const struct MfMatrix *m,
                             double *re,
                             double *im,
                             size_t cap,
                             size_t *count);

// Runs a named computation ("rref", "lu", "eig", ...) on a JSON request
// `{"matrix": ..., "args": {...}}`, the same body the HTTP API accepts.
//
// # Safety
// `op` and `request` must be NUL-terminated; `out` must be writable.
enum MfStatus mf_compute_json(const char *op, const char *request, char **out);

// Starts a session on a rational matrix. `mode_json` is `"reduce_to_ref"`,
// `"reduce_to_rref"` or `{"krylov": {"b": [...]}}`.
//
// # Safety
// `m` must be a live handle; `mode_json` NUL-terminated; `out` writable.
enum MfStatus mf_session_new(const struct MfMatrix *m,
                             const char *mode_json,
                             struct MfSession **out);

// Releases a session. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void mf_session_free(struct MfSession *s);

// Applies `{"kind": "Swap", "i": 0, "j": 1}` style operations. An illegal
// move is not an error: the result has `"accepted": false` and the state is
// unchanged. Result: `{"accepted", "note", "state"}`.
//
// # Safety
// `s` must be a live handle; `op_json` NUL-terminated; `out` writable.
enum MfStatus mf_session_apply(struct MfSession *s, const char *op_json, char **out);

// # Safety
// `s` must be a live handle; `out` writable.
enum MfStatus mf_session_state(const struct MfSession *s, char **out);

// Suggested next operation; `GOAL_REACHED` once the goal is met.
//
// # Safety
// `s` must be a live handle; `out` writable.
enum MfStatus mf_session_hint(const struct MfSession *s, char **out);

// Preview of an operation without applying it.
//
// # Safety
// `s` must be a live handle; `op_json` NUL-terminated; `out` writable.
enum MfStatus mf_session_whatif(const struct MfSession *s, const char *op_json, char **out);

// Replayable transcript of the session.
//
// # Safety
// `s` must be a live handle; `out` writable.
enum MfStatus mf_session_export(const struct MfSession *s, char **out);

// Replays a transcript and checks every recorded matrix and the final
// state. On success `out` receives `{"valid": true, "steps", "status"}`.
//
// # Safety
// `transcript_json` NUL-terminated; `out` writable.
enum MfStatus mf_transcript_verify(const char *transcript_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MATRIXFIRST_H */
