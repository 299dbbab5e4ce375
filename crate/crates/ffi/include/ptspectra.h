#ifndef PTSPECTRA_H
#define PTSPECTRA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PtsStatus {
  PTS_STATUS_OK = 0,
  PTS_STATUS_NULL_POINTER = 1,
  PTS_STATUS_INVALID_ARGUMENT = 2,
  PTS_STATUS_NO_CONVERGENCE = 3,
  PTS_STATUS_NUMERICAL_FAILURE = 4,
  PTS_STATUS_OUT_OF_RANGE = 5,
  PTS_STATUS_PANIC = 6,
} PtsStatus;

typedef enum PtsRegime {
  PTS_REGIME_BOX_TYPE = 0,
  PTS_REGIME_BOHR_SOMMERFELD = 1,
  PTS_REGIME_COMPLEX = 2,
  PTS_REGIME_TRANSITION = 3,
} PtsRegime;

/*
 Opaque model parameters.
 */
typedef struct PtsModel PtsModel;

/*
 Opaque complex scaling branch.
 */
typedef struct PtsScalingBranch PtsScalingBranch;

/*
 Opaque list of eigenvalues.
 */
typedef struct PtsSpectrum PtsSpectrum;

/*
 One eigenvalue: physical and mapped energy, 1-based index and regime.
 */
typedef struct PtsEigenvalue {
  uint32_t j;
  double re;
  double im;
  double mapped_re;
  double mapped_im;
  enum PtsRegime regime;
} PtsEigenvalue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *pts_version(void);

/*
 Copies the last error message of this thread into `buf` (truncated,
 always NUL-terminated) and returns the full message length without NUL.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t pts_last_error(char *buf, size_t len);

/*
 # Safety
 `out` must be null or valid for writing one pointer.
 */
enum PtsStatus pts_model_new(uint32_t n, double g, double l, double hbar, struct PtsModel **out);

/*
 # Safety
 `model` must be null or a handle from [`pts_model_new`] not yet freed.
 */
void pts_model_free(struct PtsModel *model);

/*
 The `count` eigenvalues of smallest modulus by shooting.

 # Safety
 `model` must be a live handle and `out` valid for writing one pointer.
 */
enum PtsStatus pts_spectrum_shooting(const struct PtsModel *model,
                                     size_t count,
                                     struct PtsSpectrum **out);

/*
 Roots of the Airy characteristic determinant; `n` must be 0.

 # Safety
 As [`pts_spectrum_shooting`].
 */
enum PtsStatus pts_spectrum_airy(const struct PtsModel *model,
                                 size_t count,
                                 struct PtsSpectrum **out);

/*
 Number of eigenvalues; 0 for a null handle.

 # Safety
 `spec` must be null or a live handle.
 */
size_t pts_spectrum_len(const struct PtsSpectrum *spec);

/*
 # Safety
 `spec` must be a live handle and `out` valid for one [`PtsEigenvalue`].
 */
enum PtsStatus pts_spectrum_get(const struct PtsSpectrum *spec,
                                size_t index,
                                struct PtsEigenvalue *out);

/*
 # Safety
 `spec` must be null or a live handle.
 */
void pts_spectrum_free(struct PtsSpectrum *spec);

/*
 Integrates the complex scaling branch for `n` at tolerance `tol`.

 # Safety
 `out` must be valid for writing one pointer.
 */
enum PtsStatus pts_scaling_branch_new(uint32_t n, double tol, struct PtsScalingBranch **out);

/*
 Endpoint `(tau_c, E_c)` of the branch.

 # Safety
 `branch` must be a live handle; outputs valid for one `double` each.
 */
enum PtsStatus pts_scaling_branch_endpoint(const struct PtsScalingBranch *branch,
                                           double *tau_c,
                                           double *e_c);

/*
 Mapped energy on the branch at `tau` in `[0, tau_c]`.

 # Safety
 `branch` must be a live handle; outputs valid for one `double` each.
 */
enum PtsStatus pts_scaling_branch_eval(const struct PtsScalingBranch *branch,
                                       double tau,
                                       double *re,
                                       double *im);

/*
 # Safety
 `branch` must be null or a live handle.
 */
void pts_scaling_branch_free(struct PtsScalingBranch *branch);

/*
 `Ai(z)` and `Ai'(z)` as `out[0..4] = {Re Ai, Im Ai, Re Ai', Im Ai'}`.

 # Safety
 `out` must be valid for writing four `double`s.
 */
enum PtsStatus pts_airy(double re, double im, double *out);

/*
 Static NUL-terminated name of a status code.
 */
const char *pts_status_name(enum PtsStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PTSPECTRA_H */
