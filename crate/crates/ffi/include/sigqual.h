#ifndef SIGQUAL_H
#define SIGQUAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum SqStatus {
  SQ_STATUS_OK = 0,
  SQ_STATUS_NULL_POINTER = 1,
  SQ_STATUS_INVALID_UTF8 = 2,
  SQ_STATUS_PARSE_ERROR = 3,
  SQ_STATUS_INVALID_ARGUMENT = 4,
  SQ_STATUS_FEATURE_ERROR = 5,
  SQ_STATUS_QUALITY_ERROR = 6,
  SQ_STATUS_VERIFY_ERROR = 7,
  SQ_STATUS_EVAL_ERROR = 8,
  SQ_STATUS_BUFFER_TOO_SMALL = 9,
  SQ_STATUS_PANIC = 99,
} SqStatus;

/*
 Extracted histogram feature vector.
 */
typedef struct SqFeatures SqFeatures;

/*
 Parsed signature sample.
 */
typedef struct SqSample SqSample;

/*
 Enrolled template.
 */
typedef struct SqTemplate SqTemplate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. The pointer
 stays valid until the next call into this library on the same thread.
 */
const char *sq_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *sq_version(void);

/*
 Parses SVC text (NUL-terminated) into a new sample handle.

 # Safety
 `text` must be a valid NUL-terminated string; `out` must be writable.
 */
enum SqStatus sq_sample_parse_svc(const char *text, struct SqSample **out);

/*
 Number of points in a sample, 0 for NULL.

 # Safety
 `sample` must be NULL or a live handle.
 */
uintptr_t sq_sample_len(const struct SqSample *sample);

/*
 # Safety
 `sample` must be NULL or a handle not yet freed.
 */
void sq_sample_free(struct SqSample *sample);

/*
 Extracts default-layout histogram features (4 speed bins, 16 angle bins,
 16 pressure bins) with the given pressure ceiling.

 # Safety
 `sample` must be a live handle; `out` must be writable.
 */
enum SqStatus sq_features_extract(const struct SqSample *sample,
                                  uint32_t pressure_max,
                                  struct SqFeatures **out);

/*
 Length of the flattened feature vector, 0 for NULL.

 # Safety
 `features` must be NULL or a live handle.
 */
uintptr_t sq_features_len(const struct SqFeatures *features);

/*
 Copies the flattened features (first-half speed-angle, second-half
 speed-angle, then pressure halves) into `buf`.

 # Safety
 `features` must be a live handle; `buf` must hold `cap` doubles.
 */
enum SqStatus sq_features_copy(const struct SqFeatures *features, double *buf, uintptr_t cap);

/*
 # Safety
 `features` must be NULL or a handle not yet freed.
 */
void sq_features_free(struct SqFeatures *features);

/*
 Enrols a template from `n` feature handles.

 # Safety
 `features` must point to `n` live handles; `user_id` must be NULL or a
 NUL-terminated string; `out` must be writable.
 */
enum SqStatus sq_template_enroll(const char *user_id,
                                 const struct SqFeatures *const *features,
                                 uintptr_t n,
                                 struct SqTemplate **out);

/*
 # Safety
 `template` must be NULL or a handle not yet freed.
 */
void sq_template_free(struct SqTemplate *template_);

/*
 Distinctiveness against the binomial random-signature population with
 `l_pop` drawing vectors per half.

 # Safety
 `template` must be a live handle; `out` must be writable.
 */
enum SqStatus sq_distinctiveness(const struct SqTemplate *template_, uint32_t l_pop, double *out);

/*
 Complexity (EMD times inverse dispersion).

 # Safety
 `template` must be a live handle; `out` must be writable.
 */
enum SqStatus sq_complexity(const struct SqTemplate *template_, double *out);

/*
 Quantized-Manhattan dissimilarity of `features` to `template`.

 # Safety
 Both handles must be live; `out` must be writable.
 */
enum SqStatus sq_histogram_score(const struct SqTemplate *template_,
                                 const struct SqFeatures *features,
                                 double *out);

/*
 Repeatability from `n` validation scores. All-zero scores give +inf.

 # Safety
 `scores` must hold `n` doubles; `out` must be writable.
 */
enum SqStatus sq_repeatability(const double *scores, uintptr_t n, double *out);

/*
 Length-normalized DTW distance between two samples.

 # Safety
 Both handles must be live; `out` must be writable.
 */
enum SqStatus sq_dtw_distance(const struct SqSample *a, const struct SqSample *b, double *out);

/*
 Spearman rank correlation of two length-`n` arrays.

 # Safety
 `x` and `y` must each hold `n` doubles; `out` must be writable.
 */
enum SqStatus sq_spearman(const double *x, const double *y, uintptr_t n, double *out);

/*
 Equal error rate of genuine vs imposter dissimilarity scores.

 # Safety
 Arrays must hold the stated counts; outputs must be writable.
 */
enum SqStatus sq_eer(const double *genuine,
                     uintptr_t n_genuine,
                     const double *imposter,
                     uintptr_t n_imposter,
                     double *out_threshold,
                     double *out_rate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIGQUAL_H */
