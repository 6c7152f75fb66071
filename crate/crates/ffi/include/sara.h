/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef SARA_H
#define SARA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  SARA_STATUS_OK = 0,
  SARA_STATUS_NULL_POINTER = 1,
  SARA_STATUS_INVALID_ARGUMENT = 2,
  SARA_STATUS_RESOURCE = 3,
  SARA_STATUS_IO = 4,
  SARA_STATUS_NOT_CONVERGED = 5,
  SARA_STATUS_PANIC = 6,
} SaraStatus;

typedef enum {
  SARA_SENSING_KIND_SPREAD_SPECTRUM = 0,
  SARA_SENSING_KIND_GAUSSIAN = 1,
  // Variable-density Fourier sampling; uses the `decay` argument.
  SARA_SENSING_KIND_VD_FOURIER = 2,
} SaraSensingKind;

// Opaque analysis dictionary.
typedef struct SaraDictionary SaraDictionary;

// Opaque measurement operator.
typedef struct SaraOperator SaraOperator;

typedef struct {
  double sigma_n;
  double isnr_db;
  double epsilon;
  double sigma_alpha;
} SaraNoise;

// Inner solver settings. The data-fidelity radius comes from [`SaraNoise`].
typedef struct {
  size_t max_iters;
  double rel_tol;
  double dr_gamma;
  double dr_lambda;
  double ball_proj_tol;
  size_t ball_proj_max_iters;
  double prox_tol;
  size_t prox_max_iters;
} SaraSolverParams;

typedef struct {
  double beta;
  double eta;
  size_t n_max;
} SaraReweightParams;

// Summary of a reconstruction.
typedef struct {
  // Weighted solves performed, including the first unweighted one.
  size_t solves;
  size_t inner_iterations;
  double gamma;
  double rho;
  double objective;
  double residual_norm;
  // False if any inner solve hit its iteration cap.
  bool converged;
} SaraReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into the library from the same thread.
const char *sara_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *sara_version(void);

// Dictionary over `width x height` images. `bases` is a comma-separated list
// such as `"db1-db8,dirac"`.
//
// # Safety
// `bases` must be a NUL-terminated string and `out` a valid pointer.
SaraStatus sara_dictionary_new(const char *bases,
                               size_t depth,
                               size_t width,
                               size_t height,
                               SaraDictionary **out);

// # Safety
// `dict` must come from [`sara_dictionary_new`] and not be used afterwards.
void sara_dictionary_free(SaraDictionary *dict);

// Number of pixels N; 0 for a null handle.
//
// # Safety
// `dict` must be null or a live handle.
size_t sara_dictionary_signal_len(const SaraDictionary *dict);

// Number of coefficients D = qN; 0 for a null handle.
//
// # Safety
// `dict` must be null or a live handle.
size_t sara_dictionary_coeff_len(const SaraDictionary *dict);

// Analysis coefficients of a complex image.
//
// # Safety
// `x` holds `x_len` complex values and `out` room for `out_len`.
SaraStatus sara_dictionary_analysis(const SaraDictionary *dict,
                                    const double *x,
                                    size_t x_len,
                                    double *out,
                                    size_t out_len);

// Image synthesized from coefficients; the adjoint of the analysis.
//
// # Safety
// `alpha` holds `alpha_len` complex values and `out` room for `out_len`.
SaraStatus sara_dictionary_synthesis(const SaraDictionary *dict,
                                     const double *alpha,
                                     size_t alpha_len,
                                     double *out,
                                     size_t out_len);

// Measurement operator taking `m` samples of a `width x height` image.
//
// # Safety
// `out` must be a valid pointer.
SaraStatus sara_operator_new(SaraSensingKind kind,
                             size_t width,
                             size_t height,
                             size_t m,
                             uint64_t seed,
                             double decay,
                             SaraOperator **out);

// # Safety
// `op` must come from [`sara_operator_new`] and not be used afterwards.
void sara_operator_free(SaraOperator *op);

// Number of measurements M; 0 for a null handle.
//
// # Safety
// `op` must be null or a live handle.
size_t sara_operator_m(const SaraOperator *op);

// Number of pixels N; 0 for a null handle.
//
// # Safety
// `op` must be null or a live handle.
size_t sara_operator_n(const SaraOperator *op);

// `out = Phi x`.
//
// # Safety
// `x` holds `n` complex values and `out` room for `m`.
SaraStatus sara_operator_apply(const SaraOperator *op,
                               const double *x,
                               size_t n,
                               double *out,
                               size_t m);

// `out = Phi^* y`.
//
// # Safety
// `y` holds `m` complex values and `out` room for `n`.
SaraStatus sara_operator_adjoint(const SaraOperator *op,
                                 const double *y,
                                 size_t m,
                                 double *out,
                                 size_t n);

// Noise level giving `isnr_db` on the clean measurements of `image`, with
// the ball radius and the sparsity-domain level for `dict`.
//
// # Safety
// `image` holds `n` values and `out` is a valid pointer.
SaraStatus sara_calibrate_noise(const SaraOperator *op,
                                const SaraDictionary *dict,
                                const double *image,
                                size_t n,
                                double isnr_db,
                                SaraNoise *out);

// `y = Phi x + n` with complex Gaussian noise of level `noise->sigma_n`.
//
// # Safety
// `image` holds `n` values, `y_out` room for `m` complex values.
SaraStatus sara_simulate_measurements(const SaraOperator *op,
                                      const SaraNoise *noise,
                                      const double *image,
                                      size_t n,
                                      uint64_t seed,
                                      double *y_out,
                                      size_t m);

SaraSolverParams sara_solver_params_default(void);

SaraReweightParams sara_reweight_params_default(void);

// Reweighted reconstruction from measurements `y`. `reweight` and `solver`
// may be NULL for defaults; `n_max = 1` gives the unweighted solve.
// `report` may be NULL.
//
// # Safety
// `y` holds `m` complex values, `x_out` room for `n` values.
SaraStatus sara_reconstruct(const SaraOperator *op,
                            const SaraDictionary *dict,
                            const double *y,
                            size_t m,
                            const SaraNoise *noise,
                            const SaraReweightParams *reweight,
                            const SaraSolverParams *solver,
                            double *x_out,
                            size_t n,
                            SaraReport *report);

// `20 log10(|x| / |x - x_hat|)` in dB.
//
// # Safety
// `x` and `x_hat` hold `n` values, `out` is a valid pointer.
SaraStatus sara_snr(const double *x, const double *x_hat, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SARA_H */
