#ifndef NCMART_H
#define NCMART_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum NcmStatus {
  NCM_STATUS_OK = 0,
  NCM_STATUS_NULL_POINTER = 1,
  NCM_STATUS_INVALID_ARGUMENT = 2,
  NCM_STATUS_INVALID_DIMENSIONS = 3,
  NCM_STATUS_CONTEXT_MISMATCH = 4,
  NCM_STATUS_NOT_HERMITIAN = 5,
  NCM_STATUS_NOT_POSITIVE = 6,
  NCM_STATUS_NOT_PROJECTION = 7,
  NCM_STATUS_NOT_MARTINGALE = 8,
  NCM_STATUS_NUMERICAL_BREAKDOWN = 9,
  NCM_STATUS_CONFIG = 10,
  NCM_STATUS_IO = 11,
  // A Rust panic was caught at the boundary.
  NCM_STATUS_PANIC = 12,
} NcmStatus;

typedef enum NcmFiltrationKind {
  // `M_{2^k} ⊗ 1` for `k = 1..=depth`; `2^depth` must divide `dim`.
  NCM_FILTRATION_KIND_TENSOR = 0,
  // Diagonal matrices constant on dyadic blocks.
  NCM_FILTRATION_KIND_DYADIC_DIAGONAL = 1,
  // The tensor filtration conjugated by a seeded Haar unitary.
  NCM_FILTRATION_KIND_CONJUGATED = 2,
} NcmFiltrationKind;

typedef enum NcmPart {
  // Column part `dy`.
  NCM_PART_COLUMN = 0,
  // Row part `dz`.
  NCM_PART_ROW = 1,
} NcmPart;

typedef enum NcmCommand {
  NCM_COMMAND_VERIFY = 0,
  NCM_COMMAND_BG_SWEEP = 1,
  NCM_COMMAND_LLOGL = 2,
  NCM_COMMAND_C0 = 3,
} NcmCommand;

typedef struct NcmDecomposition NcmDecomposition;

typedef struct NcmFiltration NcmFiltration;

typedef struct NcmMartingale NcmMartingale;

typedef struct NcmCuculescuSummary {
  // `τ(1 − q)`.
  double trace_complement;
  // `‖x‖_1 / λ`.
  double trace_bound;
  bool all_pass;
} NcmCuculescuSummary;

typedef struct NcmDecompositionReport {
  double martingale_difference;
  double reconstruction;
  // `‖dy‖_{L²(l²_C)} + ‖dz‖_{L²(l²_R)}`.
  double l2_value;
  double l2_norm;
  double weak_value;
  double l1_norm;
  double weak_ratio;
  double square_expansion;
  double row_square_expansion;
  size_t components;
} NcmDecompositionReport;

typedef struct NcmC0 {
  double c0;
  double alpha;
  double beta;
  double k_theory;
} NcmC0;

typedef struct NcmRunSummary {
  size_t rows;
  size_t failed;
  bool all_pass;
} NcmRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ncm_version(void);

// Copies the calling thread's last error message into `buf` (truncated,
// always NUL-terminated when `cap > 0`) and returns its full length in
// bytes, excluding the terminator. The message is empty after a success.
//
// # Safety
// `buf` must be NULL or valid for `cap` bytes.
size_t ncm_last_error_message(char *buf, size_t cap);

// Builds a filtration of `depth` levels on `M_dim`. `seed` is used by
// `Conjugated` only.
//
// # Safety
// `out` must be valid for writes.
enum NcmStatus ncm_filtration_new(enum NcmFiltrationKind kind,
                                  size_t dim,
                                  size_t depth,
                                  uint64_t seed,
                                  struct NcmFiltration **out);

// # Safety
// `f` must be NULL or a handle from [`ncm_filtration_new`] not yet freed.
void ncm_filtration_free(struct NcmFiltration *f);

// Matrix dimension `N`, or 0 for NULL.
//
// # Safety
// `f` must be NULL or a live handle.
size_t ncm_filtration_dim(const struct NcmFiltration *f);

// Number of levels, or 0 for NULL.
//
// # Safety
// `f` must be NULL or a live handle.
size_t ncm_filtration_depth(const struct NcmFiltration *f);

// Writes `E_level(x)`; levels are numbered from 1.
//
// # Safety
// `f` must be a live handle; the arrays must hold `len = N*N` doubles.
enum NcmStatus ncm_filtration_expectation(const struct NcmFiltration *f,
                                          size_t level,
                                          const double *re,
                                          const double *im,
                                          size_t len,
                                          double *out_re,
                                          double *out_im);

// The martingale `x_n = E_n(x_∞)`. The filtration handle may be freed
// afterwards.
//
// # Safety
// `f` must be a live handle; the arrays must hold `len = N*N` doubles.
enum NcmStatus ncm_martingale_from_final(const struct NcmFiltration *f,
                                         const double *re,
                                         const double *im,
                                         size_t len,
                                         struct NcmMartingale **out);

// A seeded positive martingale with `‖x_∞‖_1 = norm1`.
//
// # Safety
// `f` must be a live handle and `out` valid for writes.
enum NcmStatus ncm_martingale_random_positive(const struct NcmFiltration *f,
                                              uint64_t seed,
                                              double norm1,
                                              struct NcmMartingale **out);

// # Safety
// `m` must be NULL or a live handle.
void ncm_martingale_free(struct NcmMartingale *m);

// Number of terms, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t ncm_martingale_len(const struct NcmMartingale *m);

// Writes the term `x_n`, `n` counted from 1.
//
// # Safety
// `m` must be a live handle; the arrays must hold `len = N*N` doubles.
enum NcmStatus ncm_martingale_term(const struct NcmMartingale *m,
                                   size_t n,
                                   double *out_re,
                                   double *out_im,
                                   size_t len);

// Cuculescu projections of a positive martingale at level `lambda`.
//
// # Safety
// `m` must be a live handle and `out` valid for writes.
enum NcmStatus ncm_cuculescu(const struct NcmMartingale *m,
                             double lambda,
                             struct NcmCuculescuSummary *out);

// Splits `dx = dy + dz` into column and row parts.
//
// # Safety
// `m` must be a live handle and `out` valid for writes.
enum NcmStatus ncm_decompose(const struct NcmMartingale *m, struct NcmDecomposition **out);

// # Safety
// `d` must be NULL or a live handle.
void ncm_decomposition_free(struct NcmDecomposition *d);

// # Safety
// `d` must be a live handle and `out` valid for writes.
enum NcmStatus ncm_decomposition_report(const struct NcmDecomposition *d,
                                        struct NcmDecompositionReport *out);

// Writes the `n`-th difference (from 1) of the column or row part.
//
// # Safety
// `d` must be a live handle; the arrays must hold `len = N*N` doubles.
enum NcmStatus ncm_decomposition_difference(const struct NcmDecomposition *d,
                                            enum NcmPart part,
                                            size_t n,
                                            double *out_re,
                                            double *out_im,
                                            size_t len);

// # Safety
// `out` must be valid for writes.
enum NcmStatus ncm_theoretical_constant_c0(struct NcmC0 *out);

// Runs a harness experiment. `config_json` (NULL for defaults) is an
// experiment configuration; when `out_dir` is non-NULL, `report.csv` and
// `summary.json` are written there.
//
// # Safety
// The strings must be NULL or NUL-terminated; `out` must be valid for writes.
enum NcmStatus ncm_run_experiment(enum NcmCommand command,
                                  const char *config_json,
                                  const char *out_dir,
                                  struct NcmRunSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCMART_H */
