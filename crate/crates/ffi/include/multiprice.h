#ifndef MULTIPRICE_H
#define MULTIPRICE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum MpStatus {
  MP_STATUS_OK = 0,
  MP_STATUS_NULL_POINTER = 1,
  MP_STATUS_INVALID_ARGUMENT = 2,
  MP_STATUS_NO_CROSSING = 3,
  MP_STATUS_IO = 4,
  MP_STATUS_INTERNAL = 5,
} MpStatus;

typedef enum MpScenario {
  MP_SCENARIO_M = 0,
  MP_SCENARIO_P_IGNORE = 1,
  MP_SCENARIO_P_SEPARATE = 2,
  MP_SCENARIO_P_COMBINE = 3,
} MpScenario;

typedef enum MpMethod {
  MP_METHOD_ROW_SCAN = 0,
  MP_METHOD_BISECTION = 1,
} MpMethod;

typedef enum MpVerdict {
  MP_VERDICT_HOLDS = 0,
  MP_VERDICT_VIOLATED = 1,
  MP_VERDICT_INDETERMINATE = 2,
} MpVerdict;

typedef enum MpChoice {
  MP_CHOICE_HIGH = 0,
  MP_CHOICE_LOW = 1,
  MP_CHOICE_OUTSIDE = 2,
} MpChoice;

typedef enum MpFixedEffects {
  MP_FIXED_EFFECTS_NONE = 0,
  MP_FIXED_EFFECTS_SUBJECT = 1,
  MP_FIXED_EFFECTS_SUBJECT_PRODUCT = 2,
} MpFixedEffects;

/**
 * Opaque dataset handle.
 */
typedef struct MpDataset MpDataset;

/**
 * Opaque model handle.
 */
typedef struct MpModel MpModel;

/**
 * Price list rows `min, min + step, ..., max`.
 */
typedef struct MpGrid {
  double min;
  double max;
  double step;
} MpGrid;

typedef struct MpElicitation {
  /**
   * Valid only when `has_switch` is nonzero.
   */
  double switch_point;
  int32_t has_switch;
  uint64_t crossing_count;
  /**
   * 0 none, 1 at the list minimum, 2 never switched.
   */
  int32_t clamped;
} MpElicitation;

typedef struct MpAudit {
  enum MpVerdict injective;
  enum MpVerdict symmetry;
  enum MpVerdict linearity;
  int32_t m_mpl;
  int32_t p_ignore_or_separate;
  int32_t p_combine;
} MpAudit;

typedef struct MpPrediction {
  enum MpChoice choice;
  int32_t tie;
  double v_h;
  double v_l;
  double v_o;
} MpPrediction;

typedef struct MpRegression {
  double block;
  double block_se;
  /**
   * NaN when absorbed by product effects.
   */
  double price;
  double price_se;
  double block_price;
  double block_price_se;
  double constant;
  double constant_se;
  uint64_t n_observations;
  uint64_t n_clusters;
} MpRegression;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success. Owned by the library.
 */
const char *mp_last_error(void);

/**
 * Library version, static storage.
 */
const char *mp_version(void);

enum MpStatus mp_model_rn_linear(double gamma, struct MpModel **out_model);

enum MpStatus mp_model_rn_kinked(double gamma, double lambda, struct MpModel **out_model);

enum MpStatus mp_model_rn_power(double gamma, double alpha, struct MpModel **out_model);

enum MpStatus mp_model_pn(struct MpModel **out_model);

enum MpStatus mp_model_gpn(double sigma, struct MpModel **out_model);

enum MpStatus mp_model_gpn_power(double sigma, double alpha, struct MpModel **out_model);

enum MpStatus mp_model_cc(double theta, struct MpModel **out_model);

enum MpStatus mp_model_ncc(double theta, struct MpModel **out_model);

/**
 * Model from TOML config keys (`model`, `utility`, `lambda`, `alpha`, `gamma`, `sigma`, `theta`).
 */
enum MpStatus mp_model_from_config(const char *config, struct MpModel **out_model);

/**
 * Writes the model's display name, NUL terminated, truncated to `capacity`. Returns the full
 * length excluding the terminator.
 */
size_t mp_model_name(const struct MpModel *m, char *buffer, size_t capacity);

void mp_model_free(struct MpModel *m);

/**
 * `V` of alternative `target` in a 2- or 3-alternative menu stored row-major
 * (`n_alternatives * n_attributes` values).
 */
enum MpStatus mp_evaluate(const struct MpModel *m,
                          const double *values,
                          size_t n_alternatives,
                          size_t n_attributes,
                          size_t target,
                          double *out_value);

/**
 * Switch point for quality `q`. `endowment` is ignored for the m and p-ignore scenarios.
 */
enum MpStatus mp_elicit(const struct MpModel *m,
                        enum MpScenario kind,
                        double endowment,
                        double q,
                        struct MpGrid grid,
                        enum MpMethod method,
                        double tolerance,
                        struct MpElicitation *out_result);

/**
 * Model-implied quality of a switch point; `*has_value` is 0 when no closed form is known.
 */
enum MpStatus mp_implied_quality(const struct MpModel *m,
                                 enum MpScenario kind,
                                 double endowment,
                                 double switch_point,
                                 double *out_quality,
                                 int32_t *has_value);

enum MpStatus mp_audit(const struct MpModel *m,
                       double lo,
                       double hi,
                       size_t count,
                       double tolerance,
                       struct MpAudit *out_audit);

/**
 * `P(X >= k)` for `X ~ Binomial(trials, 1/2)`.
 */
enum MpStatus mp_binom_tail(uint64_t trials, uint64_t k, double *out_value);

/**
 * Two-sided sign test p-value from directional counts.
 */
enum MpStatus mp_sign_test(uint64_t n_m, uint64_t n_p, double *out_p);

/**
 * Minimal significant score for `k` products; `*has_value` is 0 when none exists.
 */
enum MpStatus mp_threshold_score(uint64_t k,
                                 double significance,
                                 uint64_t *out_threshold,
                                 int32_t *has_value);

/**
 * Choice among `{h=(hq,-hp), l=(lq,-lp), o=(0,0)}`.
 */
enum MpStatus mp_predict_choice(const struct MpModel *m,
                                double lq,
                                double hq,
                                double lp,
                                double hp,
                                struct MpPrediction *out_prediction);

enum MpStatus mp_dataset_read(const char *path, struct MpDataset **out_dataset);

enum MpStatus mp_dataset_write(const struct MpDataset *d, const char *path);

/**
 * Noise-free or noisy cohort on the default 30-product catalog and the default price list.
 * Qualities are uniform on `[quality_min, quality_max]`; the first half (rounded up) of the
 * subjects get the mp treatment.
 */
enum MpStatus mp_dataset_simulate(const struct MpModel *m,
                                  enum MpScenario p_scenario,
                                  double endowment,
                                  size_t subjects,
                                  double quality_min,
                                  double quality_max,
                                  double noise_sd,
                                  uint64_t seed,
                                  struct MpDataset **out_dataset);

/**
 * Number of records, 0 for a null handle.
 */
size_t mp_dataset_len(const struct MpDataset *d);

enum MpStatus mp_dataset_fe_ols(const struct MpDataset *d,
                                enum MpFixedEffects fixed_effects,
                                struct MpRegression *out_regression);

void mp_dataset_free(struct MpDataset *d);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MULTIPRICE_H */
