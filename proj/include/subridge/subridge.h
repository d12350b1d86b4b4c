#ifndef SUBRIDGE_SUBRIDGE_H
#define SUBRIDGE_SUBRIDGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(SUBRIDGE_BUILDING_LIBRARY)
#define SR_API __attribute__((visibility("default")))
#else
#define SR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sr_status {
  SR_OK = 0,
  SR_INVALID_ARGUMENT = 1,
  SR_VALIDATION = 2,
  SR_NON_CONVERGENCE = 3,
  SR_SINGULAR_RESOLVENT = 4,
  SR_DIMENSION_MISMATCH = 5,
  SR_IO = 6,
  SR_PARSE = 7,
  SR_NUMERICAL = 8,
  SR_INTERNAL = 9
} sr_status;

typedef enum sr_plan_strategy {
  SR_PLAN_HOMOGENEOUS = 0,
  SR_PLAN_HETEROGENEOUS = 1,
  SR_PLAN_REPLACEMENT = 2
} sr_plan_strategy;

typedef enum sr_truth_scheme { SR_TRUTH_ISOTROPIC = 0, SR_TRUTH_SPIKED = 1 } sr_truth_scheme;

typedef enum sr_reg_mode {
  SR_REG_RIDGELESS = 0,
  SR_REG_LOCALLY_OPTIMAL = 1,
  SR_REG_EXPLICIT = 2
} sr_reg_mode;

/* opaque handles */
typedef struct sr_covariance sr_covariance;
typedef struct sr_plan sr_plan;
typedef struct sr_truth sr_truth;
typedef struct sr_features sr_features;
typedef struct sr_classifier sr_classifier;
typedef struct sr_grid sr_grid;

SR_API const char* sr_version(void);
SR_API const char* sr_status_name(sr_status status);
/* Message of the last failed call on this thread; "" if none. */
SR_API const char* sr_last_error(void);
SR_API void sr_string_free(char* text);

/* Matrices are row-major. */
SR_API sr_status sr_covariance_equicorrelated(double s, double c, double omega2, int64_t dimension,
                                              sr_covariance** out);
SR_API sr_status sr_covariance_toeplitz(int64_t dimension, double signal_scale, double signal_decay,
                                        double noise_scale, double noise_decay, sr_covariance** out);
/* noise may be NULL */
SR_API sr_status sr_covariance_from_matrices(int64_t dimension, const double* signal,
                                             const double* noise, sr_covariance** out);
SR_API int64_t sr_covariance_dimension(const sr_covariance* cov);
SR_API void sr_covariance_free(sr_covariance* cov);

/* fractions: k entries or NULL */
SR_API sr_status sr_plan_sample(sr_plan_strategy strategy, int64_t k, double sigma, int64_t dimension,
                                uint64_t seed, const double* fractions, sr_plan** out);
/* masks concatenated; sizes[r] indices for readout r */
SR_API sr_status sr_plan_from_masks(int64_t k, const int64_t* sizes, const int64_t* indices,
                                    int64_t dimension, sr_plan** out);
SR_API int64_t sr_plan_size(const sr_plan* plan);
SR_API int64_t sr_plan_mask_size(const sr_plan* plan, int64_t r);
SR_API sr_status sr_plan_mask(const sr_plan* plan, int64_t r, int64_t* indices);
SR_API sr_status sr_plan_fractions(const sr_plan* plan, double* nu);
SR_API void sr_plan_free(sr_plan* plan);

SR_API sr_status sr_truth_sample(sr_truth_scheme scheme, double rho, int64_t dimension, uint64_t seed,
                                 sr_truth** out);
SR_API sr_status sr_truth_from_weights(int64_t dimension, const double* weights, sr_truth** out);
SR_API sr_status sr_truth_weights(const sr_truth* truth, double* weights);
SR_API void sr_truth_free(sr_truth* truth);

/* General theory. lambda and eta hold k entries; gamma and pairwise are k x k. */
SR_API sr_status sr_general_solve(const sr_covariance* cov, const sr_plan* plan, const double* lambda,
                                  double alpha, double* q, double* q_hat, double* gamma);
SR_API sr_status sr_general_errors(const sr_covariance* cov, const sr_plan* plan, const sr_truth* truth,
                                   const double* lambda, double alpha, double zeta, const double* eta,
                                   double* pairwise, double* ensemble);

/* Equicorrelated closed forms. nu is k x k. */
SR_API sr_status sr_equicorr_order_params(double a, double nu, double alpha, double lambda, double* q,
                                          double* q_hat);
SR_API sr_status sr_equicorr_errors(double s, double c, double omega2, double zeta, double rho, int64_t k,
                                    const double* nu, const double* lambda, const double* eta,
                                    double alpha, double* pairwise, double* ensemble);
SR_API sr_status sr_optimal_local_regularization(double s, double c, double nu, double rho, double zeta,
                                                 double eta, double omega2, double* lambda_star);
SR_API sr_status sr_optimal_k(double H, double W, double Z, double rho, double alpha, sr_reg_mode mode,
                              int k_max, double Lambda, double* k_star, double* error);
/* +inf when the noise-dominated phase is absent */
SR_API sr_status sr_noise_dominated_boundary(double rho, double H, double W, double* alpha);
SR_API sr_status sr_infinite_data_error(int k, const double* nu_diag, double s, double eta,
                                        double* error);

/* One simulated trial: draw P samples, train every readout, evaluate the exact error. */
SR_API sr_status sr_simulate_trial(const sr_covariance* cov, const sr_plan* plan, const sr_truth* truth,
                                   double zeta, const double* lambda, const double* eta, int64_t P,
                                   uint64_t seed, double* pairwise, double* ensemble);

/* format: "auto", "csv" or "binary"; classes 0 infers */
SR_API sr_status sr_features_load(const char* path, const char* format, int classes, int center,
                                  sr_features** out);
SR_API sr_status sr_features_create(int64_t n, int64_t dimension, const double* features,
                                    const int32_t* labels, int classes, sr_features** out);
SR_API sr_status sr_features_save(const sr_features* data, const char* path, const char* format);
SR_API int64_t sr_features_rows(const sr_features* data);
SR_API int64_t sr_features_dimension(const sr_features* data);
SR_API int sr_features_classes(const sr_features* data);
SR_API void sr_features_free(sr_features* data);

SR_API sr_status sr_classifier_train(const sr_features* train, const sr_plan* plan, const double* lambda,
                                     const double* eta, uint64_t seed, sr_classifier** out);
SR_API sr_status sr_classifier_predict(const sr_classifier* clf, int64_t n, const double* features,
                                       uint64_t eval_seed, int32_t* labels);
SR_API sr_status sr_classifier_error(const sr_classifier* clf, const sr_features* test, uint64_t eval_seed,
                                     double* error);
SR_API void sr_classifier_free(sr_classifier* clf);

typedef struct sr_run_options {
  const char* command; /* "auto", "theory", "simulate", "curve", "phase", "classify" */
  int has_seed;
  uint64_t seed;
  int threads; /* 0: all cores */
  int full_matrix;
  int dump_order_params;
} sr_run_options;

SR_API void sr_run_options_init(sr_run_options* options);
/* SR_OK when valid; otherwise SR_VALIDATION and *messages (if non-NULL) gets one problem per line. */
SR_API sr_status sr_config_validate(const char* config_json, char** messages);
SR_API sr_status sr_run_config(const char* config_json, const sr_run_options* options, sr_grid** out);

/* format: "csv" or "json" */
SR_API sr_status sr_grid_emit(const sr_grid* grid, const char* format, const char* path);
SR_API sr_status sr_grid_to_string(const sr_grid* grid, const char* format, char** out);
SR_API sr_status sr_grid_parse(const char* text, const char* format, sr_grid** out);
SR_API sr_status sr_grid_load(const char* path, sr_grid** out);
/* *out is NULL when no order parameters were recorded */
SR_API sr_status sr_grid_order_params(const sr_grid* grid, char** out);
SR_API size_t sr_grid_cell_count(const sr_grid* grid);
SR_API size_t sr_grid_failed_count(const sr_grid* grid);
SR_API size_t sr_grid_axis_count(const sr_grid* grid);
SR_API const char* sr_grid_axis_name(const sr_grid* grid, size_t axis);
SR_API size_t sr_grid_axis_length(const sr_grid* grid, size_t axis);
SR_API double sr_grid_axis_value(const sr_grid* grid, size_t axis, size_t i);
SR_API size_t sr_grid_column_count(const sr_grid* grid);
SR_API const char* sr_grid_column_name(const sr_grid* grid, size_t column);
SR_API sr_status sr_grid_value(const sr_grid* grid, size_t cell, const char* column, double* value);
/* "" for cells that succeeded */
SR_API const char* sr_grid_cell_error(const sr_grid* grid, size_t cell);
SR_API const char* sr_grid_config_hash(const sr_grid* grid);
SR_API int sr_grid_equal(const sr_grid* a, const sr_grid* b);
SR_API void sr_grid_free(sr_grid* grid);

#ifdef __cplusplus
}
#endif

#endif
