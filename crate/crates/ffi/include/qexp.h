#ifndef QEXP_H
#define QEXP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values 2–5 match the exit codes of the `qexp` binary.
 */
typedef enum QexpStatus {
  QEXP_STATUS_OK = 0,
  QEXP_STATUS_NULL_POINTER = 1,
  QEXP_STATUS_USAGE = 2,
  QEXP_STATUS_DOMAIN = 3,
  QEXP_STATUS_BUDGET = 4,
  QEXP_STATUS_INVARIANT = 5,
  QEXP_STATUS_PANIC = 6,
} QexpStatus;

typedef enum QexpSide {
  QEXP_SIDE_X = 0,
  QEXP_SIDE_Z = 1,
} QexpSide;

typedef enum QexpMode {
  QEXP_MODE_ALG1 = 0,
  QEXP_MODE_ALG2 = 1,
} QexpMode;

/**
 * Hypergraph-product code.
 */
typedef struct QexpCode QexpCode;

/**
 * Code, one side's flip catalog and decoder parameters.
 */
typedef struct QexpDecoder QexpDecoder;

/**
 * Outcome of one decode call.
 */
typedef struct QexpDecodeResult {
  /**
   * 1 when the final syndrome is empty.
   */
  uint8_t converged;
  size_t flips;
  size_t residual_weight;
} QexpDecodeResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next failing call on the same thread.
 */
const char *qexp_last_error(void);

/**
 * Product code of a random biregular seed graph.
 */
enum QexpStatus qexp_code_random(size_t n_a,
                                 size_t n_b,
                                 size_t d_a,
                                 size_t d_b,
                                 uint64_t seed,
                                 struct QexpCode **out);

/**
 * Product code of a seed graph given in the text format
 * (`BIPARTITE n_left n_right d_left d_right` then one line per edge).
 */
enum QexpStatus qexp_code_from_seed_text(const char *text, struct QexpCode **out);

void qexp_code_free(struct QexpCode *code);

/**
 * Number of qubits, or 0 for NULL.
 */
size_t qexp_code_n(const struct QexpCode *code);

/**
 * Number of logical qubits, or 0 for NULL.
 */
size_t qexp_code_k(const struct QexpCode *code);

/**
 * Number of checks producing the syndrome on `side`, or 0 for NULL.
 */
size_t qexp_code_checks(const struct QexpCode *code, enum QexpSide side);

/**
 * Syndrome of a 0/1 error vector of length n into a buffer of length
 * `qexp_code_checks(code, side)`.
 */
enum QexpStatus qexp_syndrome(const struct QexpCode *code,
                              enum QexpSide side,
                              const uint8_t *error,
                              size_t n,
                              uint8_t *syndrome,
                              size_t m);

/**
 * Sets `*equivalent` to 1 when `a ⊕ b` is a stabilizer on `side`.
 */
enum QexpStatus qexp_equivalent(const struct QexpCode *code,
                                enum QexpSide side,
                                const uint8_t *a,
                                const uint8_t *b,
                                size_t n,
                                uint8_t *equivalent);

/**
 * Builds a decoder for one side. `beta_num/beta_den` is used by
 * `QEXP_MODE_ALG2` only; `max_flips = 0` keeps the proven default cap.
 */
enum QexpStatus qexp_decoder_new(const struct QexpCode *code,
                                 enum QexpSide side,
                                 enum QexpMode mode,
                                 int64_t beta_num,
                                 int64_t beta_den,
                                 size_t max_flips,
                                 struct QexpDecoder **out);

void qexp_decoder_free(struct QexpDecoder *dec);

/**
 * Decodes a 0/1 syndrome of length m, writing the 0/1 estimate of length
 * n. An unreachable syndrome returns `QEXP_STATUS_DOMAIN`.
 */
enum QexpStatus qexp_decode(const struct QexpDecoder *dec,
                            const uint8_t *syndrome,
                            size_t m,
                            uint8_t *estimate,
                            size_t n,
                            struct QexpDecodeResult *result);

/**
 * Local-stochastic threshold for degree bound `d` and density `alpha`.
 */
enum QexpStatus qexp_p_ls(size_t d, double alpha, double *out);

/**
 * Independent-noise threshold (root of q(p) = 1).
 */
enum QexpStatus qexp_p_iid(size_t d, double alpha, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QEXP_H */
