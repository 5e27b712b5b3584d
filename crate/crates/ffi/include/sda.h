/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SDA_H
#define SDA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SDA_FLAG_RIDGE_FALLBACK 1

#define SDA_FLAG_EMPTY_SELECTION 2

#define SDA_FLAG_LASSO_NONCONVERGED 4

typedef enum SdaStatus {
  SDA_STATUS_OK = 0,
  SDA_STATUS_INVALID_ARGUMENT = 1,
  SDA_STATUS_NULL_POINTER = 2,
  SDA_STATUS_NOT_PSD = 3,
  SDA_STATUS_SINGULAR = 4,
  SDA_STATUS_NUMERICAL_FAILURE = 5,
  SDA_STATUS_NOT_CONVERGED = 6,
  SDA_STATUS_PANIC = 7,
} SdaStatus;

typedef enum SdaPrecisionKind {
  SDA_PRECISION_KIND_IDENTITY = 0,
  // `omega` must point at a row-major p×p precision matrix.
  SDA_PRECISION_KIND_KNOWN = 1,
  SDA_PRECISION_KIND_GRAPHICAL_LASSO = 2,
} SdaPrecisionKind;

// Opaque selection result.
typedef struct SdaSelection SdaSelection;

typedef struct SdaConfig {
  double alpha;
  // Conservative `+1` threshold.
  bool plus;
  // Number of splits to aggregate; 0 or 1 runs a single split.
  size_t rsda_runs;
  // Rank with the unscaled first-half coefficient.
  bool t1_raw;
  enum SdaPrecisionKind precision;
  uint64_t seed;
} SdaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` as a
// NUL-terminated string, truncating if needed. Returns the full message
// length excluding the terminator.
//
// # Safety
// `buf` must be null or valid for `capacity` writes.
size_t sda_last_error_message(char *buf, size_t capacity);

// Library version as a static NUL-terminated string.
const char *sda_version(void);

// Data-adaptive threshold on precomputed ranking statistics. Indices in the
// result are positions in `w`.
//
// # Safety
// `w` must be valid for `len` reads and `out` for one write.
enum SdaStatus sda_threshold(const double *w,
                             size_t len,
                             double alpha,
                             bool plus,
                             struct SdaSelection **out);

// Benjamini–Hochberg step-up over `len` p-values. The threshold is the
// largest rejected p-value, or 0 when nothing is rejected.
//
// # Safety
// `p_values` must be valid for `len` reads and `out` for one write.
enum SdaStatus sda_bh(const double *p_values, size_t len, double alpha, struct SdaSelection **out);

// One-sample filter on a row-major `n × p` data matrix. The statistics
// array of the result has length `p` with NaN for unscreened features.
//
// # Safety
// `data` must be valid for `n·p` reads, `omega` for `p·p` reads when the
// precision kind is `Known`, `config` for one read and `out` for one write.
enum SdaStatus sda_run(const double *data,
                       size_t n,
                       size_t p,
                       const double *omega,
                       const struct SdaConfig *config,
                       struct SdaSelection **out);

// Two-sample filter for `μᵃ = μᵇ` on row-major `n_a × p` and `n_b × p`
// matrices. With `Known` precision, `omega` is the common precision of
// both groups.
//
// # Safety
// As for [`sda_run`], with `data_a` and `data_b` valid for `n_a·p` and
// `n_b·p` reads.
enum SdaStatus sda_two_sample(const double *data_a,
                              size_t n_a,
                              const double *data_b,
                              size_t n_b,
                              size_t p,
                              const double *omega,
                              const struct SdaConfig *config,
                              struct SdaSelection **out);

// Number of selected indices; 0 for a null handle.
//
// # Safety
// `sel` must be null or a live handle.
size_t sda_selection_len(const struct SdaSelection *sel);

// Copies up to `capacity` selected indices (ascending) into `buf` and
// returns the total number selected.
//
// # Safety
// `sel` must be null or a live handle; `buf` must be null or valid for
// `capacity` writes.
size_t sda_selection_indices(const struct SdaSelection *sel, size_t *buf, size_t capacity);

// Copies up to `capacity` per-feature statistics into `buf` and returns
// their total count.
//
// # Safety
// As for [`sda_selection_indices`].
size_t sda_selection_statistics(const struct SdaSelection *sel, double *buf, size_t capacity);

// Selection threshold; `+inf` when no threshold qualified and NaN for a
// null handle.
//
// # Safety
// `sel` must be null or a live handle.
double sda_selection_threshold(const struct SdaSelection *sel);

// Bitwise OR of the `SDA_FLAG_*` constants.
//
// # Safety
// `sel` must be null or a live handle.
uint32_t sda_selection_flags(const struct SdaSelection *sel);

// Zero-based split chosen by aggregation, or -1 for a single split.
//
// # Safety
// `sel` must be null or a live handle.
int64_t sda_selection_chosen_run(const struct SdaSelection *sel);

// Releases a handle. Null is ignored.
//
// # Safety
// `sel` must be null or a handle not yet freed.
void sda_selection_free(struct SdaSelection *sel);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDA_H */
