#ifndef CATALYQ_H
#define CATALYQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CatalyqStatus {
  CATALYQ_STATUS_OK = 0,
  CATALYQ_STATUS_NULL_POINTER = 1,
  CATALYQ_STATUS_ARGUMENT = 2,
  CATALYQ_STATUS_DIMENSION = 3,
  CATALYQ_STATUS_INVARIANT = 4,
  CATALYQ_STATUS_SIZE_CAP = 5,
  CATALYQ_STATUS_CONSTRUCTION = 6,
  CATALYQ_STATUS_COPIES_INSUFFICIENT = 7,
  CATALYQ_STATUS_REFUSED = 8,
  CATALYQ_STATUS_NUMERICAL = 9,
  CATALYQ_STATUS_IO = 10,
  CATALYQ_STATUS_JSON = 11,
  CATALYQ_STATUS_UTF8 = 12,
  CATALYQ_STATUS_PANIC = 13,
} CatalyqStatus;

/**
 * A finished run: its JSON report and whether every check passed.
 */
typedef struct CatalyqReport CatalyqReport;

/**
 * A density operator.
 */
typedef struct CatalyqState CatalyqState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread; empty after a
 * success. Valid until the next call on the same thread.
 */
const char *catalyq_last_error(void);

/**
 * Parses a state in the `{"dims":[..],"matrix":[[[re,im],..],..]}` format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CatalyqStatus catalyq_state_from_json(const char *json, struct CatalyqState **out);

/**
 * A diagonal state from `len` probabilities.
 *
 * # Safety
 * `probs` must point to `len` doubles; `out` must be writable.
 */
enum CatalyqStatus catalyq_state_diagonal(const double *probs,
                                          size_t len,
                                          struct CatalyqState **out);

/**
 * The thermal state of a diagonal Hamiltonian with the given energies.
 *
 * # Safety
 * `energies` must point to `len` doubles; `out` must be writable.
 */
enum CatalyqStatus catalyq_gibbs_state(const double *energies,
                                       size_t len,
                                       double beta,
                                       struct CatalyqState **out);

/**
 * # Safety
 * `state` must be null or a handle from this library not yet freed.
 */
void catalyq_state_free(struct CatalyqState *state);

/**
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum CatalyqStatus catalyq_state_dim(const struct CatalyqState *state, size_t *out);

/**
 * Serializes a state; release the string with [`catalyq_string_free`].
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum CatalyqStatus catalyq_state_to_json(const struct CatalyqState *state, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void catalyq_string_free(char *s);

/**
 * `S₁(a‖b)` in nats; infinite when `a` leaves the support of `b`.
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum CatalyqStatus catalyq_kl_divergence(const struct CatalyqState *a,
                                         const struct CatalyqState *b,
                                         double *out);

/**
 * `S_∞(a‖b)` in nats.
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum CatalyqStatus catalyq_renyi_inf(const struct CatalyqState *a,
                                     const struct CatalyqState *b,
                                     double *out);

/**
 * `S_H^{1-eps}(a‖b)` in nats.
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum CatalyqStatus catalyq_hypothesis_divergence(const struct CatalyqState *a,
                                                 const struct CatalyqState *b,
                                                 double eps,
                                                 double *out);

/**
 * Catalytic conversion `rho → rho_p` by Gibbs-preserving maps for `gibbs`.
 *
 * # Safety
 * All handles must be live; `out` must be writable.
 */
enum CatalyqStatus catalyq_convert_free_energy(const struct CatalyqState *rho,
                                               const struct CatalyqState *rho_p,
                                               const struct CatalyqState *gibbs,
                                               double beta,
                                               double eps,
                                               double delta,
                                               size_t n_max,
                                               struct CatalyqReport **out);

/**
 * Catalytic conversion of the pair `(rho, eta)` into `(rho_p, eta_p)`.
 *
 * # Safety
 * All handles must be live; `out` must be writable.
 */
enum CatalyqStatus catalyq_convert_relative(const struct CatalyqState *rho,
                                            const struct CatalyqState *rho_p,
                                            const struct CatalyqState *eta,
                                            const struct CatalyqState *eta_p,
                                            double eps,
                                            double delta,
                                            size_t n_max,
                                            struct CatalyqReport **out);

/**
 * The eight-copy qubit example.
 *
 * # Safety
 * `out` must be writable.
 */
enum CatalyqStatus catalyq_toy_example(struct CatalyqReport **out);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum CatalyqStatus catalyq_report_passed(const struct CatalyqReport *report, bool *out);

/**
 * The report as JSON, owned by the handle and valid until it is freed.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
const char *catalyq_report_json(const struct CatalyqReport *report);

/**
 * # Safety
 * `report` must be null or a handle from this library not yet freed.
 */
void catalyq_report_free(struct CatalyqReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CATALYQ_H */
