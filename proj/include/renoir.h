/*
 * C interface to the renoir robustness toolkit.
 *
 * Every entry point returns rr_status; RR_OK means success and anything
 * else leaves a description in rr_last_error() (thread-local, valid until
 * the next failing call on the same thread). Objects are opaque handles
 * released with their _free function. Strings returned through char**
 * outputs are heap-allocated and released with rr_string_free.
 */
#ifndef RENOIR_H
#define RENOIR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(RENOIR_BUILD)
#define RENOIR_API __declspec(dllexport)
#else
#define RENOIR_API __declspec(dllimport)
#endif
#else
#define RENOIR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rr_status {
    RR_OK = 0,
    RR_ERR_INVALID = 1, /* bad argument, failed validation, bad config */
    RR_ERR_PARSE = 2,   /* malformed JSON/CSV input */
    RR_ERR_NUMERIC = 3, /* runtime numeric failure */
    RR_ERR_IO = 4       /* file system failure */
} rr_status;

typedef struct rr_noise_s rr_noise;
typedef struct rr_dataset_s rr_dataset;
typedef struct rr_net_s rr_net;

RENOIR_API const char* rr_version(void);
RENOIR_API const char* rr_last_error(void);
RENOIR_API void rr_string_free(char* s);

/* Caps the worker count used by data-parallel loops. Results are identical
 * for every cap. */
RENOIR_API void rr_set_max_threads(int n);

/* ---- noise models ----------------------------------------------------- */

/* spec_json: {"family":"gaussian","sigma":0.3,"dim":2},
 *            {"family":"gaussian","cov":[[...],...]} or
 *            {"family":"laplace","b":0.1,"dim":2} */
RENOIR_API rr_status rr_noise_from_json(const char* spec_json, rr_noise** out);
RENOIR_API rr_status rr_noise_to_json(const rr_noise* noise, char** json_out);
RENOIR_API void rr_noise_free(rr_noise* noise);
RENOIR_API int rr_noise_dim(const rr_noise* noise);

/* Fills out[n*dim], row i = draw i; deterministic in (seed, n). */
RENOIR_API rr_status rr_noise_sample(const rr_noise* noise, int n, uint64_t seed, double* out);
RENOIR_API rr_status rr_noise_log_density(const rr_noise* noise, const double* z, int dim,
                                          double* out);

/* ---- divergences ------------------------------------------------------ */

/* lambda >= 1; pass INFINITY for the max divergence. +infinity results are
 * returned as such. */
RENOIR_API rr_status rr_renyi_discrete(const double* p, const double* q, int k, double lambda,
                                       double* out);
RENOIR_API rr_status rr_tv_discrete(const double* p, const double* q, int k, double* out);
RENOIR_API rr_status rr_shannon_entropy(const double* p, int k, double* out);
RENOIR_API rr_status rr_collision_entropy(const double* p, int k, double* out);
RENOIR_API rr_status rr_renyi_gaussian_shift(const double* m1, const double* m2,
                                             const double* cov /* d*d row-major */, int d,
                                             double lambda, double* out);
RENOIR_API rr_status rr_renyi_to_tv(double eps, double* out);

/* Bounds implied by a Renyi level; wasserstein uses diam, separation is
 * filled only when lambda_is_inf != 0 (otherwise NaN). */
RENOIR_API rr_status rr_renyi_ladder(double eps, int lambda_is_inf, double diam, double* hellinger,
                                     double* prokhorov, double* discrepancy, double* wasserstein,
                                     double* separation);

/* ---- datasets ---------------------------------------------------------- */

/* spec_json: {"kind":"blobs",...}, {"kind":"moons",...} or {"kind":"csv","path":...} */
RENOIR_API rr_status rr_dataset_from_json(const char* spec_json, rr_dataset** out);
RENOIR_API rr_status rr_dataset_load_csv(const char* path, rr_dataset** out);
RENOIR_API rr_status rr_dataset_save_csv(const rr_dataset* data, const char* path);
RENOIR_API void rr_dataset_free(rr_dataset* data);
RENOIR_API int64_t rr_dataset_size(const rr_dataset* data);
RENOIR_API int rr_dataset_dim(const rr_dataset* data);
RENOIR_API int rr_dataset_classes(const rr_dataset* data);
RENOIR_API rr_status rr_dataset_diameter(const rr_dataset* data, const char* norm, double* out);

/* ---- nets -------------------------------------------------------------- */

RENOIR_API rr_status rr_net_load(const char* path, rr_net** out);
RENOIR_API rr_status rr_net_to_json(const rr_net* net, char** json_out);
RENOIR_API void rr_net_free(rr_net* net);
RENOIR_API int rr_net_input_dim(const rr_net* net);
RENOIR_API int rr_net_classes(const rr_net* net);
RENOIR_API int rr_net_has_noise(const rr_net* net);

/* config_json holds model/noise/train sections (see the README); the
 * dataset comes in as a handle. loss_csv_out receives the per-epoch loss
 * trace as CSV when non-NULL. */
RENOIR_API rr_status rr_net_train(const char* config_json, const rr_dataset* data, rr_net** out,
                                  char** loss_csv_out);

/* probs_out must hold rr_net_classes() entries. */
RENOIR_API rr_status rr_net_predict_distribution(const rr_net* net, const double* x, int dim,
                                                 int n_mc, uint64_t seed, double* probs_out);

/* ---- certification, attacks, curves ------------------------------------ */

/* metric: renyi|tv|hellinger|prokhorov|discrepancy|wasserstein|separation.
 * lambda may be INFINITY (required for separation). Certificate JSON goes
 * to cert_json_out. */
RENOIR_API rr_status rr_certify(const rr_net* net, double alpha, double lambda, const char* metric,
                                double diam, char** cert_json_out);

/* attack_spec_json mirrors the CLI flags ({"kind":"pgd","alpha":0.06,...}).
 * Produces a risk report JSON with risks, entropy terms and gap bounds. */
RENOIR_API rr_status rr_attack_report(const rr_net* net, const rr_dataset* data,
                                      const char* attack_spec_json, double lambda, int n_mc,
                                      uint64_t seed, char** report_json_out);

/* Guaranteed-accuracy rows over the alpha grid as CSV. */
RENOIR_API rr_status rr_curve(const rr_net* net, const rr_dataset* data, const double* alphas,
                              int n_alphas, double lambda, int n_mc, uint64_t seed, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif /* RENOIR_H */
