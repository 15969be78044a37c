#ifndef EMR_DLT_H
#define EMR_DLT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EmrPerspective {
  EMR_PERSPECTIVE_NODE = 0,
  EMR_PERSPECTIVE_EDGE = 1,
} EmrPerspective;

typedef enum EmrRelayMode {
  EMR_RELAY_MODE_BUFFERED = 0,
  EMR_RELAY_MODE_UNBUFFERED = 1,
  EMR_RELAY_MODE_UNCODED = 2,
} EmrRelayMode;

typedef enum EmrStatus {
  EMR_STATUS_OK = 0,
  EMR_STATUS_NULL_POINTER = 1,
  EMR_STATUS_INVALID_ARGUMENT = 2,
  EMR_STATUS_INVALID_DISTRIBUTION = 3,
  EMR_STATUS_NO_DESIGN = 4,
  EMR_STATUS_NUMERICAL = 5,
  EMR_STATUS_IO = 6,
  EMR_STATUS_PROTOCOL = 7,
  EMR_STATUS_PANIC = 8,
} EmrStatus;

/**
 * Aggregated Monte Carlo campaign.
 */
typedef struct EmrCampaign EmrCampaign;

/**
 * Result of a relay design sweep.
 */
typedef struct EmrDesign EmrDesign;

/**
 * Degree distribution handle.
 */
typedef struct EmrDistribution EmrDistribution;

/**
 * Symmetric network settings for [`emr_campaign_run`].
 */
typedef struct EmrNetworkParams {
  uintptr_t users;
  uintptr_t k;
  double eps_up;
  double eps_down;
  enum EmrRelayMode mode;
  /**
   * 0 selects the default budget `5 (users - 1) k`.
   */
  uint64_t max_broadcast_phases;
  uint64_t seed;
} EmrNetworkParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *emr_last_error_message(void);

/**
 * Builds a distribution from `len` probabilities indexed by degree
 * (`probs[0]` is degree 0).
 *
 * # Safety
 * `probs` must point to `len` readable doubles; `out` must be writable.
 */
enum EmrStatus emr_distribution_new(enum EmrPerspective perspective,
                                    const double *probs,
                                    uintptr_t len,
                                    struct EmrDistribution **out);

/**
 * The ten-user reference relay distribution.
 *
 * # Safety
 * `out` must be writable.
 */
enum EmrStatus emr_distribution_reference(struct EmrDistribution **out);

/**
 * The degree-66 raptor output distribution.
 *
 * # Safety
 * `out` must be writable.
 */
enum EmrStatus emr_distribution_raptor(struct EmrDistribution **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum EmrStatus emr_distribution_robust_soliton(uintptr_t k,
                                               double c,
                                               double sigma,
                                               struct EmrDistribution **out);

/**
 * Reads the plain-text distribution format.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum EmrStatus emr_distribution_read_file(const char *path, struct EmrDistribution **out);

/**
 * Largest supported degree; 0 for a null handle.
 *
 * # Safety
 * `dist` must be null or a live handle.
 */
uintptr_t emr_distribution_max_degree(const struct EmrDistribution *dist);

/**
 * Probability of `degree`; 0 for a null handle or unsupported degree.
 *
 * # Safety
 * `dist` must be null or a live handle.
 */
double emr_distribution_prob(const struct EmrDistribution *dist, uintptr_t degree);

/**
 * # Safety
 * `dist` must be null or a live handle.
 */
double emr_distribution_mean(const struct EmrDistribution *dist);

/**
 * # Safety
 * `dist` must be null or a handle not yet freed.
 */
void emr_distribution_free(struct EmrDistribution *dist);

/**
 * Asymptotic erasure rate of one user at reception overhead `overhead`.
 *
 * # Safety
 * `gamma` must be a live node-perspective handle; `out` must be writable.
 */
enum EmrStatus emr_de_erasure(const struct EmrDistribution *gamma,
                              uintptr_t users,
                              double overhead,
                              double *out);

/**
 * Overhead at which the asymptotic erasure rate reaches `delta`.
 *
 * # Safety
 * `gamma` must be a live node-perspective handle; `out` must be writable.
 */
enum EmrStatus emr_de_threshold(const struct EmrDistribution *gamma,
                                uintptr_t users,
                                double delta,
                                double *out);

/**
 * LP sweep design with default sweep grid; `max_degree = 0` means `users`.
 *
 * # Safety
 * `out` must be writable.
 */
enum EmrStatus emr_design_run(uintptr_t users,
                              uintptr_t max_degree,
                              double delta,
                              uintptr_t grid_points,
                              struct EmrDesign **out);

/**
 * Asymptotic overhead of the design at its target erasure rate.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
double emr_design_overhead(const struct EmrDesign *design);

/**
 * Sweep value of the selected design.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
double emr_design_sweep_parameter(const struct EmrDesign *design);

/**
 * Copies the designed relay distribution (node perspective) into a new handle.
 *
 * # Safety
 * `design` must be a live handle; `out` must be writable.
 */
enum EmrStatus emr_design_distribution(const struct EmrDesign *design,
                                       struct EmrDistribution **out);

/**
 * # Safety
 * `design` must be null or a handle not yet freed.
 */
void emr_design_free(struct EmrDesign *design);

/**
 * Runs `trials` trials and aggregates the erasure rate on `grid`. User
 * encoders send single bits, except in uncoded mode where they use
 * `user_dist` (required there, ignored otherwise).
 *
 * # Safety
 * `params`, `gamma` must be live; `user_dist` null or live; `grid` must
 * point to `grid_len` doubles; `out` must be writable.
 */
enum EmrStatus emr_campaign_run(const struct EmrNetworkParams *params,
                                const struct EmrDistribution *gamma,
                                const struct EmrDistribution *user_dist,
                                uintptr_t trials,
                                const double *grid,
                                uintptr_t grid_len,
                                struct EmrCampaign **out);

/**
 * Number of grid points; 0 for a null handle.
 *
 * # Safety
 * `campaign` must be null or a live handle.
 */
uintptr_t emr_campaign_len(const struct EmrCampaign *campaign);

/**
 * Mean erasure rate and its standard error at grid point `index`.
 *
 * # Safety
 * `campaign` must be live; `mean` and `stderr` must be writable.
 */
enum EmrStatus emr_campaign_point(const struct EmrCampaign *campaign,
                                  uintptr_t index,
                                  double *mean,
                                  double *stderr);

/**
 * Share of trials where every user decoded.
 *
 * # Safety
 * `campaign` must be null or a live handle.
 */
double emr_campaign_success_fraction(const struct EmrCampaign *campaign);

/**
 * Mean reception overhead over decoded users; NaN if none decoded.
 *
 * # Safety
 * `campaign` must be null or a live handle.
 */
double emr_campaign_mean_overhead(const struct EmrCampaign *campaign);

/**
 * # Safety
 * `campaign` must be null or a handle not yet freed.
 */
void emr_campaign_free(struct EmrCampaign *campaign);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* EMR_DLT_H */
