/*
 * catgp — Gaussian process regression with categorical inputs.
 *
 * C API of the shared library. All functions return CATGP_OK on success;
 * on failure they return an error code and leave a message retrievable with
 * catgp_last_error() (thread-local). Objects are opaque handles released
 * with their *_free function. Handles are immutable once created and may be
 * shared across threads; the error message buffer is per thread.
 */
#ifndef CATGP_H
#define CATGP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum catgp_status {
  CATGP_OK = 0,
  CATGP_ERR_INVALID = 1, /* bad arguments, unknown names, schema violations */
  CATGP_ERR_RUNTIME = 2  /* I/O errors and numerical failures */
} catgp_status;

const char* catgp_version(void);

/* Message for the most recent failure on this thread ("" if none). */
const char* catgp_last_error(void);

typedef struct catgp_dataset_s catgp_dataset;
typedef struct catgp_model_s catgp_model;

/* ---- datasets ---------------------------------------------------------- */

/* Writes train/test CSVs for an analytic dataset replicate. `dataset` is one
 * of f1, f2, beam_bending, borehole, borehole2, otl, otl2, piston, piston2,
 * goldstein. The test set is the dataset's fixed one (independent of the
 * training seed). Refuses to overwrite existing files unless force != 0. */
catgp_status catgp_generate(const char* dataset, int samples_per_level, uint64_t train_seed,
                            const char* train_csv_path, const char* test_csv_path, int force);

/* Default base seed of a dataset (replicate k trains with base + k). */
catgp_status catgp_base_seed(const char* dataset, uint64_t* out);

catgp_status catgp_dataset_load_csv(const char* path, catgp_dataset** out);
catgp_status catgp_dataset_rows(const catgp_dataset* d, size_t* out);
catgp_status catgp_dataset_cont_dims(const catgp_dataset* d, size_t* out);
catgp_status catgp_dataset_cat_dims(const catgp_dataset* d, size_t* out);
catgp_status catgp_dataset_level_count(const catgp_dataset* d, size_t cat_index, int* out);
void catgp_dataset_free(catgp_dataset* d);

/* ---- fitting and prediction -------------------------------------------- */

/* Trains a GP with the named method (CS, one_hot, Ho, Ho_NC, He, He_NC,
 * Ho_2, Ho_3, EHH, FE, LVGP, no_cat, multiplicative, diffusion,
 * Nested_<between>_<within>[_MSD|_LV]). For plain Nested_* methods,
 * groups_json carries one JSON partition of 1-based levels per categorical
 * variable, e.g. "[[[1,2],[3,4]]]"; pass NULL for _MSD/_LV (inferred) and
 * for non-nested methods. opt_mode is "short" or "long". */
catgp_status catgp_fit(const catgp_dataset* train, const char* method, const char* groups_json,
                       const char* opt_mode, int n_restarts, uint64_t seed, catgp_model** out);

catgp_status catgp_model_save(const catgp_model* m, const char* path, int force);
catgp_status catgp_model_load(const char* path, catgp_model** out);
catgp_status catgp_model_param_count(const catgp_model* m, int* out);
catgp_status catgp_model_fit_seconds(const catgp_model* m, double* out);

/* Posterior mean (and optionally marginal variance) in natural units.
 * mean/variance point at test-row-count doubles; variance may be NULL. */
catgp_status catgp_predict(const catgp_model* m, const catgp_dataset* test, double* mean,
                           double* variance);
catgp_status catgp_score_rrmse(const catgp_model* m, const catgp_dataset* test, double* out);
void catgp_model_free(catgp_model* m);

/* ---- group inference ---------------------------------------------------- */

/* Clusters the levels of one categorical variable. embedding is "msd"
 * (target mean/standard-deviation encoding) or "lvgp" (latent positions of
 * a proxy LVGP fit). On success *partition_json receives the selected
 * partition and *silhouette_csv a "q,score" table; both are released with
 * catgp_string_free. */
catgp_status catgp_cluster(const catgp_dataset* train, const char* embedding, size_t cat_index,
                           uint64_t seed, char** partition_json, char** silhouette_csv);
void catgp_string_free(char* s);

/* ---- benchmark harness --------------------------------------------------- */

/* Runs the experiment grid described by an INI-style config (see
 * docs/config.md), appending to <out_dir>/records.csv (resumable) and
 * emitting profile/Pareto aggregates. jobs > 0 overrides [suite] jobs;
 * if seed_override is non-NULL it replaces every dataset base seed. */
catgp_status catgp_bench_run(const char* config_path, const char* out_dir, int jobs,
                             const uint64_t* seed_override);

/* Recomputes profiles.csv/svg, auc.csv and pareto.csv/svg from a records
 * CSV. */
catgp_status catgp_profiles_emit(const char* records_csv, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* CATGP_H */
