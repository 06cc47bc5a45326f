/* C API for the msa library: opaque handles, integer status codes, and
 * UTF-8 strings. Every function returning msa_status sets a thread-local
 * error message retrievable with msa_last_error() on failure. Strings
 * returned through char** are owned by the caller and released with
 * msa_string_free(). */
#ifndef MSA_C_H
#define MSA_C_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msa_status {
  MSA_OK = 0,
  MSA_ERROR_INVALID_ARGUMENT = 1,
  MSA_ERROR_IO = 2,
  MSA_ERROR_NUMERIC = 3,
  MSA_ERROR_INTERNAL = 4
} msa_status;

const char* msa_version(void);
/* Message from the most recent failing call on this thread. */
const char* msa_last_error(void);
void msa_string_free(char* text);

/* ---------- datasets ---------- */

typedef struct msa_dataset msa_dataset;

msa_status msa_dataset_load_csv(const char* path, msa_dataset** out);
/* x is row-major n x d; y and domains may be NULL (unlabeled). Domain
 * indices must lie in [0, p). */
msa_status msa_dataset_create(int64_t n, int32_t d, const double* x, const double* y,
                              const int32_t* domains, int32_t p, msa_dataset** out);
void msa_dataset_free(msa_dataset* dataset);
int64_t msa_dataset_size(const msa_dataset* dataset);
int32_t msa_dataset_dim(const msa_dataset* dataset);
int32_t msa_dataset_num_domains(const msa_dataset* dataset);

/* ---------- domain posterior (conditional maxent) ---------- */

typedef struct msa_posterior msa_posterior;

typedef struct msa_maxent_config {
  double mu;            /* < 0 selects mu by five-fold cross-validation */
  double tol;           /* gradient norm stopping tolerance */
  int32_t max_iters;
  uint64_t seed;
  int32_t feature_map;  /* 0 per-class linear, 1 random Fourier */
  int32_t rff_width;
  double rff_bandwidth;
} msa_maxent_config;

void msa_maxent_config_init(msa_maxent_config* config);
msa_status msa_maxent_train(const msa_dataset* data, const msa_maxent_config* config,
                            msa_posterior** out);
int32_t msa_posterior_num_domains(const msa_posterior* model);
/* probs must hold p doubles. */
msa_status msa_posterior_eval(const msa_posterior* model, const double* x, int32_t d,
                              double* probs);
msa_status msa_posterior_to_json(const msa_posterior* model, char** json_out);
msa_status msa_posterior_from_json(const char* json_text, msa_posterior** out);
void msa_posterior_free(msa_posterior* model);

/* 2 sqrt(2) r^2 / (mu sqrt(m)) [1 + sqrt(log(1/delta))] */
msa_status msa_theorem3_radius(double feature_radius, double mu, int64_t m,
                               double delta, double* out);

/* ---------- kernel density estimation ---------- */

typedef struct msa_kde msa_kde;

/* Cross-validated bandwidth for the samples of one domain. scores may be
 * NULL; otherwise it receives grid_len mean held-out log densities. */
msa_status msa_kde_cv_bandwidth(const msa_dataset* data, int32_t domain,
                                const double* grid, int32_t grid_len, int32_t folds,
                                uint64_t seed, double* sigma_out, double* scores_out);
msa_status msa_kde_fit(const msa_dataset* data, int32_t domain, double sigma,
                       msa_kde** out);
msa_status msa_kde_density(const msa_kde* model, const double* x, int32_t d,
                           double* out);
msa_status msa_kde_to_json(const msa_kde* model, int32_t domain, char** json_out);
msa_status msa_kde_from_json(const char* json_text, msa_kde** out);
void msa_kde_free(msa_kde* model);

/* ---------- source predictors ---------- */

typedef struct msa_predictors msa_predictors;

msa_status msa_predictors_from_json(const char* json_text, msa_predictors** out);
int32_t msa_predictors_count(const msa_predictors* predictors);
/* 0 regression, 1 probability */
int32_t msa_predictors_model(const msa_predictors* predictors);
int32_t msa_predictors_label_count(const msa_predictors* predictors);
void msa_predictors_free(msa_predictors* predictors);

/* ---------- distribution-weighted prediction ---------- */

/* Discriminative combination at weights z (len p) for one point x (len d).
 * Regression: prediction_out[0]; probability: label_count entries.
 * weights_out / scores_out (len p) may be NULL. */
msa_status msa_predict_posterior(const msa_predictors* predictors,
                                 const msa_posterior* posterior, const double* z,
                                 int32_t p, double eta, const double* x, int32_t d,
                                 double* prediction_out, double* weights_out,
                                 double* scores_out);
/* Generative combination backed by one KDE per domain. */
msa_status msa_predict_kde(const msa_predictors* predictors,
                           const msa_kde* const* kdes, const double* z, int32_t p,
                           double eta, const double* x, int32_t d,
                           double* prediction_out, double* weights_out,
                           double* scores_out);
/* Uniform baseline (1/p) sum_k h_k. */
msa_status msa_predict_uniform(const msa_predictors* predictors, const double* x,
                               int32_t d, double* prediction_out);

/* ---------- solving for z ---------- */

typedef struct msa_zsolve_config {
  int32_t method;       /* 0 grid, 1 iterative */
  int32_t resolution;   /* 0 picks 100 / 40 / 20 for p = 2 / 3 / >= 4 */
  int64_t budget_cap;
  double eta;
  int32_t loss_kind;    /* 0 squared, 1 cross-entropy */
  double loss_bound;    /* M */
} msa_zsolve_config;

void msa_zsolve_config_init(msa_zsolve_config* config);
/* calibration must be fully labeled. Returns the solution as JSON
 * {z, z_prime, objective, per_domain_losses, spread, method, ...}. */
msa_status msa_solve_z_posterior(const msa_dataset* calibration,
                                 const msa_posterior* posterior,
                                 const msa_predictors* predictors,
                                 const msa_zsolve_config* config, char** json_out);
msa_status msa_solve_z_kde(const msa_dataset* calibration, const msa_kde* const* kdes,
                           int32_t p, const msa_predictors* predictors,
                           const msa_zsolve_config* config, char** json_out);

/* ---------- divergences and bounds ---------- */

/* alpha >= 0; pass INFINITY for the sup-ratio order. Distributions are
 * aligned length-n probability vectors. */
msa_status msa_renyi_divergence(const double* p, const double* q, int32_t n,
                                double alpha, double* out);
msa_status msa_bound_theorem_1_2(double epsilon, double delta, double alpha, double M,
                                 double dhat, double d_target, double* out);
msa_status msa_bound_theorem_4(double epsilon, double delta, double alpha, double M,
                               double dhat, double dhat_prime, double d_2alpha_target,
                               double* out);
msa_status msa_bound_theorem_5_dmsa(double epsilon, int32_t p, double feature_radius,
                                    double mu, int64_t m, double delta, double d_star,
                                    double d_prime_star, double* out);
msa_status msa_bound_theorem_6_gmsa(double epsilon, double M, double kappa, int32_t p,
                                    int64_t m, double delta, double d_star,
                                    double d_prime_star, double* out);

/* ---------- synthetic benchmark ---------- */

/* config_json may be "default". curves_out may be NULL. */
msa_status msa_synth_run(const char* config_json, char** report_json_out,
                         char** curves_csv_out);

#ifdef __cplusplus
}
#endif

#endif /* MSA_C_H */
