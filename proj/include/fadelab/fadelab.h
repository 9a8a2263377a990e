/*
 * fadelab C API
 *
 * Desk-scale emulation of fluctuating-loss optical channels: click-counting
 * statistics of a multiplexed detector are recorded per fixed attenuation
 * level, weighted by a discretized transmittance distribution, merged, and
 * tested for nonclassicality with matrices of normally ordered moments.
 *
 * All objects are opaque handles created and destroyed by this library.
 * Every function returns FLB_OK on success or an error code; the message of
 * the most recent failure on the calling thread is flb_last_error().
 * Outputs are written through pointers and are untouched on failure.
 */

#ifndef FADELAB_H
#define FADELAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum flb_status {
    FLB_OK = 0,
    FLB_ERR_INVALID_ARGUMENT = 1,  /* null handle / bad buffer */
    FLB_ERR_DOMAIN = 2,            /* argument outside mathematical domain */
    FLB_ERR_PARAMETER = 3,         /* invalid model parameter */
    FLB_ERR_NOT_AVAILABLE = 4,     /* no closed form for this family */
    FLB_ERR_DEGENERATE = 5,        /* distribution carries no mass */
    FLB_ERR_EMPTY_SELECTION = 6,   /* post-selection removed all mass */
    FLB_ERR_EMPTY_INPUT = 7,       /* empty sample list / zero trials */
    FLB_ERR_TRUNCATION = 8,        /* tail bound not certifiable */
    FLB_ERR_COUNTS_REQUIRED = 9,   /* counts needed, probabilities given */
    FLB_ERR_INCOMPLETE_ENSEMBLE = 10,
    FLB_ERR_SCHEMA = 11,           /* file violates the CSV schema */
    FLB_ERR_CONFIG = 12,           /* missing/inconsistent configuration */
    FLB_ERR_IO = 13,
    FLB_ERR_INTERNAL = 14
} flb_status;

/* Message of the last failure on this thread; valid until the next call. */
const char* flb_last_error(void);

typedef struct flb_model flb_model;       /* continuous transmittance model */
typedef struct flb_pdt flb_pdt;           /* discrete PDT on the grid k/n */
typedef struct flb_pnd flb_pnd;           /* photon-number distribution */
typedef struct flb_clicks flb_clicks;     /* (N+1)-outcome click statistics */
typedef struct flb_ensemble flb_ensemble; /* per-attenuation click data */
typedef struct flb_result flb_result;     /* nonclassicality verdict */
typedef struct flb_sweep flb_sweep;       /* parameter sweep of results */

typedef struct flb_detector_config {
    int n_bins;              /* N, number of multiplexing bins */
    double efficiency;       /* overall detection efficiency in [0,1] */
    double dark_click_rate;  /* mean dark exposure per bin per pulse */
} flb_detector_config;

typedef enum flb_classification {
    FLB_NONCLASSICAL = 0,
    FLB_INCONCLUSIVE = 1,
    FLB_CONSISTENT_CLASSICAL = 2
} flb_classification;

/* ---- transmittance models ---------------------------------------------- */

flb_status flb_model_log_normal(double mu, double sigma, flb_model** out);
flb_status flb_model_log_normal_var(double mu, double sigma_sq, flb_model** out);
flb_status flb_model_weibull_bw(double eta0, double shape, double scale,
                                double wander_variance, flb_model** out);
/* points: eta[i], value[i] pairs of a piecewise-linear density */
flb_status flb_model_tabulated(const double* eta, const double* value, size_t n_points,
                               flb_model** out);
flb_status flb_model_tabulated_csv(const char* path, flb_model** out);
flb_status flb_model_density(const flb_model* m, double eta, double* out);
flb_status flb_model_closed_moment(const flb_model* m, int order, double* out);
/* raw moments <eta^s>, s=1..3, of the density truncated to [0,1]; out[3] */
flb_status flb_model_truncated_moments(const flb_model* m, double* out3);
void flb_model_free(flb_model* m);

/* ---- discrete PDTs ------------------------------------------------------ */

flb_status flb_pdt_discretize(const flb_model* m, int n, flb_pdt** out);
flb_status flb_pdt_from_weights(int n, const double* weights /* n+1 */, flb_pdt** out);
flb_status flb_pdt_beta_binomial(int n, double alpha, double beta, flb_pdt** out);
flb_status flb_pdt_empirical(const double* samples, size_t n_samples, int n, flb_pdt** out);
flb_status flb_pdt_post_select(const flb_pdt* p, double eta_ps, flb_pdt** out);
flb_status flb_pdt_grid_n(const flb_pdt* p, int* out);
/* weights buffer must hold n+1 doubles */
flb_status flb_pdt_weights(const flb_pdt* p, double* out, size_t len);
/* raw moments r[s] = sum_k w_k eta_k^s for s = 0..max_order (out buffer of
 * max_order+1); mean/variance/skewness derived from the first three.
 * skewness_out receives NAN when the variance vanishes. */
flb_status flb_pdt_moments(const flb_pdt* p, int max_order, double* raw_out,
                           double* mean_out, double* variance_out, double* skewness_out);
/* relative errors of the first three transmittance moments against the
 * truncated-renormalized continuous reference (out3) and, for log-normal
 * models, against the untruncated closed form (closed_out3; NAN otherwise) */
flb_status flb_pdt_discretization_errors(const flb_model* m, const flb_pdt* p, double* out3,
                                         double* closed_out3);
flb_status flb_pdt_write_csv(const flb_pdt* p, const char* path);
flb_status flb_pdt_read_csv(const char* path, flb_pdt** out);
void flb_pdt_free(flb_pdt* p);

/* ---- source states ------------------------------------------------------ */

/* nmax < 0 selects the smallest truncation certifying tail_bound <= 1e-10 */
flb_status flb_pnd_coherent(double mean_photons, int nmax, flb_pnd** out);
flb_status flb_pnd_squeezed_vacuum(double squeeze, int nmax, flb_pnd** out);
flb_status flb_pnd_multimode_squeezed(const double* squeezes, size_t n_modes, int nmax,
                                      flb_pnd** out);
flb_status flb_pnd_thermal(double mean_photons, int nmax, flb_pnd** out);
flb_status flb_pnd_fock(int n, flb_pnd** out);
flb_status flb_pnd_emitter_array(int modes, double emit_prob, flb_pnd** out);
flb_status flb_pnd_apply_loss(const flb_pnd* p, double eta, flb_pnd** out);
flb_status flb_pnd_convolve(const flb_pnd* a, const flb_pnd* b, flb_pnd** out);
flb_status flb_pnd_nmax(const flb_pnd* p, int* out);
flb_status flb_pnd_probabilities(const flb_pnd* p, double* out, size_t len);
flb_status flb_pnd_tail_bound(const flb_pnd* p, double* out);
flb_status flb_pnd_mean(const flb_pnd* p, double* out);
flb_status flb_pnd_write_csv(const flb_pnd* p, const char* path);
void flb_pnd_free(flb_pnd* p);

/* ---- detector ----------------------------------------------------------- */

flb_status flb_clicks_from_pnd(const flb_pnd* p, const flb_detector_config* cfg,
                               flb_clicks** out);
flb_status flb_clicks_monte_carlo(const flb_pnd* p, const flb_detector_config* cfg,
                                  int64_t trials, uint64_t seed, int threads,
                                  flb_clicks** out);
flb_status flb_clicks_sample(const flb_clicks* c, int64_t trials, uint64_t seed,
                             flb_clicks** out);
flb_status flb_clicks_n_bins(const flb_clicks* c, int* out);
flb_status flb_clicks_probabilities(const flb_clicks* c, double* out, size_t len);
/* counts_out may be NULL to query only trials; *trials_out = 0 if analytic */
flb_status flb_clicks_counts(const flb_clicks* c, int64_t* counts_out, size_t len,
                             int64_t* trials_out);
flb_status flb_clicks_moment(const flb_clicks* c, int order, double* out);
flb_status flb_clicks_mean(const flb_clicks* c, double* out);
void flb_clicks_free(flb_clicks* c);

/* ---- channel ensembles -------------------------------------------------- */

/* trials == 0 builds analytic statistics; trials > 0 attaches multinomial
 * counts per attenuation level with per-level derived seeds */
flb_status flb_ensemble_build(const flb_pnd* source, const flb_detector_config* cfg,
                              int grid_n, int64_t trials, uint64_t seed, int threads,
                              flb_ensemble** out);
flb_status flb_ensemble_ingest(const char* directory, flb_ensemble** out);
flb_status flb_ensemble_export(const flb_ensemble* e, const char* directory);
flb_status flb_ensemble_grid_n(const flb_ensemble* e, int* out);
flb_status flb_ensemble_detector(const flb_ensemble* e, flb_detector_config* out);
flb_status flb_ensemble_trials(const flb_ensemble* e, int64_t* out);
/* copy of the statistics at grid index j */
flb_status flb_ensemble_member(const flb_ensemble* e, int j, flb_clicks** out);
flb_status flb_ensemble_merge(const flb_ensemble* e, const flb_pdt* pdt, flb_clicks** out);
void flb_ensemble_free(flb_ensemble* e);

/* ---- nonclassicality analysis ------------------------------------------ */

/* minimal eigenvalue e^(K) of the matrix of moments of one click record */
flb_status flb_clicks_min_eigenvalue(const flb_clicks* c, int order, double* out);
flb_status flb_atmospheric_moment(const flb_ensemble* e, const flb_pdt* pdt, int order,
                                  double* out);

typedef struct flb_analysis_options {
    int order;               /* K, even, <= N */
    int bootstrap_resamples; /* B; used when the ensemble carries counts */
    uint64_t seed;
    int threads;
    double threshold;        /* significance threshold, default 3 */
} flb_analysis_options;

flb_status flb_atmospheric_run(const flb_ensemble* e, const flb_pdt* pdt,
                               const flb_analysis_options* opt, flb_result** out);
flb_status flb_constant_loss_sweep(const flb_ensemble* e, const flb_analysis_options* opt,
                                   flb_sweep** out);
flb_status flb_postselection_sweep(const flb_ensemble* e, const flb_pdt* pdt,
                                   const flb_analysis_options* opt, const double* thresholds,
                                   size_t n_thresholds, flb_sweep** out);
/* mapping: per grid entry i, rytov_sq[i] paired with a model handle */
flb_status flb_rytov_sweep(const flb_ensemble* e, const double* rytov_sq,
                           const flb_model* const* models, size_t n_points,
                           const flb_analysis_options* opt, flb_sweep** out);
flb_status flb_beta_scan(const flb_ensemble* e, const flb_analysis_options* opt,
                         const double* alpha_grid, size_t n_alpha, const double* beta_grid,
                         size_t n_beta, flb_sweep** out);

flb_status flb_result_values(const flb_result* r, double* e_min, double* delta_e,
                             double* significance);
flb_status flb_result_classification(const flb_result* r, double threshold,
                                     flb_classification* out);
/* JSON object with e_min, delta_e, significance, K, B, seed, channel,
 * classification; caller frees with flb_string_free */
flb_status flb_result_to_json(const flb_result* r, double threshold, char** out);
void flb_result_free(flb_result* r);

flb_status flb_sweep_size(const flb_sweep* s, size_t* out);
/* params buffer of >= 2; n_params receives the arity */
flb_status flb_sweep_entry(const flb_sweep* s, size_t index, double* params, size_t* n_params,
                           double* e_min, double* delta_e, double* significance,
                           flb_classification* cls, int* is_error);
flb_status flb_sweep_entry_error(const flb_sweep* s, size_t index, char** out);
/* header_comments: NULL-terminated array of '#'-prefixed provenance lines
 * (may be NULL) */
flb_status flb_sweep_write_csv(const flb_sweep* s, const char* path,
                               const char* const* header_comments);
flb_status flb_sweep_to_json(const flb_sweep* s, char** out);
void flb_sweep_free(flb_sweep* s);

/* ---- calibration -------------------------------------------------------- */

flb_status flb_calibrate_source(double target_mean_clicks, const flb_detector_config* cfg,
                                int modes, double* squeeze_out);
flb_status flb_calibrate_emitter_array(double target_mean_clicks,
                                       const flb_detector_config* cfg, int modes,
                                       double* emit_prob_out);

void flb_string_free(char* s);

const char* flb_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FADELAB_H */
