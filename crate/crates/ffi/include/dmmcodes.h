#ifndef DMMCODES_H
#define DMMCODES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DmmStatus {
  DMM_STATUS_OK = 0,
  DMM_STATUS_NULL_POINTER = 1,
  DMM_STATUS_INVALID_ARGUMENT = 2,
  DMM_STATUS_CAPACITY = 3,
  DMM_STATUS_INFEASIBLE = 4,
  DMM_STATUS_INSUFFICIENT_RESPONSES = 5,
  DMM_STATUS_RANK_DEFICIENT = 6,
  DMM_STATUS_PARSE = 7,
  DMM_STATUS_BUFFER_TOO_SMALL = 8,
  DMM_STATUS_MISMATCH = 9,
  DMM_STATUS_INTERNAL = 10,
} DmmStatus;

/**
 * An encoded product `A·B` with its evaluation points and interpolation
 * system.
 */
typedef struct DmmCoder DmmCoder;

/**
 * A finite field.
 */
typedef struct DmmField DmmField;

/**
 * A matrix over a finite field.
 */
typedef struct DmmMatrix DmmMatrix;

/**
 * The outcome of a simulation.
 */
typedef struct DmmReport DmmReport;

/**
 * A pair of degree sets with their parameters.
 */
typedef struct DmmSolution DmmSolution;

/**
 * Scalar parameters of a solution.
 */
typedef struct DmmSolutionInfo {
  uint64_t q;
  uint64_t l;
  /**
   * 1 for matdot, 0 for polynomial splitting.
   */
  uint32_t is_matdot;
  uint64_t m;
  /**
   * Equal to `m` for matdot.
   */
  uint64_t n;
  /**
   * Measured footprint value of the sum set.
   */
  uint64_t fb;
  /**
   * `k + 1`.
   */
  uint64_t recovery_threshold;
  /**
   * `q^l`.
   */
  uint64_t workers;
} DmmSolutionInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf`.
 */
enum DmmStatus dmm_last_error_message(char *buf, size_t len, size_t *needed);

/**
 * GF(p^e) with the default modulus.
 */
enum DmmStatus dmm_field_new(uint32_t p, uint32_t e, struct DmmField **out);

/**
 * Parses `q`, `p^e` or `p^e/modulus`.
 */
enum DmmStatus dmm_field_parse(const char *spec, struct DmmField **out);

void dmm_field_free(struct DmmField *field);

/**
 * Field order `q`, or 0 for a null handle.
 */
uint64_t dmm_field_order(const struct DmmField *field);

enum DmmStatus dmm_field_add(const struct DmmField *field, uint32_t a, uint32_t b, uint32_t *out);

enum DmmStatus dmm_field_mul(const struct DmmField *field, uint32_t a, uint32_t b, uint32_t *out);

enum DmmStatus dmm_field_inv(const struct DmmField *field, uint32_t a, uint32_t *out);

/**
 * Builds a construction from its descriptor, e.g.
 * `"sep-vars mprime=5 nprime=5 F=8"`, over the field of order `q`.
 */
enum DmmStatus dmm_solution_new(uint64_t q, const char *spec, struct DmmSolution **out);

/**
 * Parses the solution text form.
 */
enum DmmStatus dmm_solution_parse(const char *text, struct DmmSolution **out);

void dmm_solution_free(struct DmmSolution *sol);

enum DmmStatus dmm_solution_info(const struct DmmSolution *sol, struct DmmSolutionInfo *out);

enum DmmStatus dmm_solution_to_text(const struct DmmSolution *sol,
                                    char *buf,
                                    size_t len,
                                    size_t *needed);

/**
 * Copies `rows * cols` entries from `data` (row-major).
 */
enum DmmStatus dmm_matrix_new(const struct DmmField *field,
                              size_t rows,
                              size_t cols,
                              const uint32_t *data,
                              struct DmmMatrix **out);

void dmm_matrix_free(struct DmmMatrix *m);

size_t dmm_matrix_rows(const struct DmmMatrix *m);

size_t dmm_matrix_cols(const struct DmmMatrix *m);

/**
 * Copies the entries into `data`, which must hold `rows * cols` values.
 */
enum DmmStatus dmm_matrix_entries(const struct DmmMatrix *m, uint32_t *data, size_t len);

/**
 * Schoolbook product.
 */
enum DmmStatus dmm_matrix_mul(const struct DmmMatrix *a,
                              const struct DmmMatrix *b,
                              struct DmmMatrix **out);

/**
 * `1` if the matrices are equal (same field, shape and entries).
 */
uint32_t dmm_matrix_equal(const struct DmmMatrix *a, const struct DmmMatrix *b);

/**
 * Encodes `A·B` under `sol`, with one worker per point of `F_q^l`.
 */
enum DmmStatus dmm_coder_new(const struct DmmSolution *sol,
                             const struct DmmMatrix *a,
                             const struct DmmMatrix *b,
                             struct DmmCoder **out);

void dmm_coder_free(struct DmmCoder *c);

/**
 * Number of workers, or 0 for a null handle.
 */
size_t dmm_coder_workers(const struct DmmCoder *c);

/**
 * `k + 1`, or 0 for a null handle.
 */
size_t dmm_coder_threshold(const struct DmmCoder *c);

/**
 * What worker `index` returns: `p_A(P_i) · p_B(P_i)`.
 */
enum DmmStatus dmm_coder_work(const struct DmmCoder *c, size_t index, struct DmmMatrix **out);

/**
 * Recovers `A·B` from `count` responses: `indices[i]` is the worker that
 * produced `products[i]`.
 */
enum DmmStatus dmm_coder_decode(const struct DmmCoder *c,
                                const size_t *indices,
                                const struct DmmMatrix *const *products,
                                size_t count,
                                struct DmmMatrix **out);

/**
 * Runs a simulation from the flat `key = value` config text.
 */
enum DmmStatus dmm_simulate(const char *config, struct DmmReport **out);

void dmm_report_free(struct DmmReport *r);

/**
 * `1` if the product was recovered and matched the oracle.
 */
uint32_t dmm_report_success(const struct DmmReport *r);

size_t dmm_report_responses_used(const struct DmmReport *r);

enum DmmStatus dmm_report_summary(const struct DmmReport *r, char *buf, size_t len, size_t *needed);

enum DmmStatus dmm_report_transcript(const struct DmmReport *r,
                                     char *buf,
                                     size_t len,
                                     size_t *needed);

/**
 * Writes table `id` (`"T1"`..`"T8"`) as TSV. Returns `Mismatch` (after
 * writing) if it differs from the bundled copy.
 */
enum DmmStatus dmm_table_tsv(const char *id, char *buf, size_t len, size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DMMCODES_H */
