/* hmmlab: spectral learning laboratory for overcomplete hidden Markov models.
 *
 * C API of the shared library. All functions return HMMLAB_OK (0) on success
 * or a nonzero status code; hmmlab_last_error() describes the most recent
 * failure on the calling thread. Objects are opaque handles released with
 * their matching _free function; strings returned through char** out-params
 * are released with hmmlab_string_free.
 */
#ifndef HMMLAB_H
#define HMMLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hmmlab_status {
    HMMLAB_OK = 0,
    HMMLAB_ERR_INVALID_ARGUMENT = 1,
    HMMLAB_ERR_DIMENSION_MISMATCH = 2,
    HMMLAB_ERR_NON_CONVERGENT = 3,
    HMMLAB_ERR_ZERO_STATIONARY_MASS = 4,
    HMMLAB_ERR_SIZE_CAP = 5,
    HMMLAB_ERR_SINGULAR_PROJECTION = 6,
    HMMLAB_ERR_COMPLEX_EIGENVALUES = 7,
    HMMLAB_ERR_PAIRING_FAILURE = 8,
    HMMLAB_ERR_RANK_DEFICIENT = 9,
    HMMLAB_ERR_EMPTY_INPUT = 10,
    HMMLAB_ERR_ALPHABET_MISMATCH = 11,
    HMMLAB_ERR_OUT_OF_RANGE = 12,
    HMMLAB_ERR_INVALID_SPEC = 13,
    HMMLAB_ERR_BUDGET_EXCEEDED = 14,
    HMMLAB_ERR_NOT_SYMMETRIC = 15,
    HMMLAB_ERR_ZERO_LIKELIHOOD = 16,
    HMMLAB_ERR_INSUFFICIENT_DATA = 17,
    HMMLAB_ERR_IO = 18,
    HMMLAB_ERR_INTERNAL = 19,
} hmmlab_status;

typedef struct hmmlab_hmm hmmlab_hmm;
typedef struct hmmlab_tensor hmmlab_tensor;

const char* hmmlab_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* hmmlab_last_error(void);

void hmmlab_string_free(char* s);

/* ---- models ----------------------------------------------------------- */

/* JSON schema: {"n":..,"m":..,"T":[[row-major]],"O":[[row-major]],"pi":[..]}
 * where T[i][j] = P[h_{t+1}=i | h_t=j] and O[i][j] = P[y_t=i | h_t=j]
 * (columns are the distributions); pi is optional. */
hmmlab_status hmmlab_hmm_from_json(const char* text, hmmlab_hmm** out);
hmmlab_status hmmlab_hmm_to_json(const hmmlab_hmm* h, char** out);

/* Build a model from generator specs (see the README for the spec JSON). */
hmmlab_status hmmlab_hmm_generate(const char* transition_spec_json,
                                  const char* observation_spec_json, hmmlab_hmm** out);

void hmmlab_hmm_free(hmmlab_hmm* h);

hmmlab_status hmmlab_hmm_dims(const hmmlab_hmm* h, int32_t* n_out, int32_t* m_out);

/* JSON array of violations; empty array means the model is valid. */
hmmlab_status hmmlab_hmm_validate(const hmmlab_hmm* h, char** report_out);

/* ---- moment tensors ---------------------------------------------------- */

hmmlab_status hmmlab_exact_moments(const hmmlab_hmm* h, int32_t tau, hmmlab_tensor** out);

hmmlab_status hmmlab_sampled_moments(const hmmlab_hmm* h, int32_t tau, int64_t windows,
                                     uint64_t seed, hmmlab_tensor** out);

hmmlab_status hmmlab_tensor_dims(const hmmlab_tensor* t, int64_t dims_out[3]);

/* Binary layout: three little-endian uint64 dims, then little-endian doubles. */
hmmlab_status hmmlab_tensor_save(const hmmlab_tensor* t, const char* path);
hmmlab_status hmmlab_tensor_load(const char* path, hmmlab_tensor** out);

/* CSV of nonzero entries: future_idx,past_idx,present,value */
hmmlab_status hmmlab_tensor_export_csv(const hmmlab_tensor* t, const char* path);

void hmmlab_tensor_free(hmmlab_tensor* t);

/* ---- recovery and diagnostics ----------------------------------------- */

/* Decompose the moment tensor at rank n and rebuild transition/observation
 * estimates. `reference` may be NULL; when given, the report carries the
 * optimal column alignment and l1 errors against it. `noisy` selects
 * tolerances suited to sampled (rather than exact) moments. */
hmmlab_status hmmlab_recover(const hmmlab_tensor* t, int32_t n, uint64_t seed, int32_t noisy,
                             const hmmlab_hmm* reference, char** report_out);

/* Measured learnability conditions plus the implied feasible exponent range. */
hmmlab_status hmmlab_assumption_profile(const hmmlab_hmm* h, uint64_t seed, char** report_out);

/* ---- experiments ------------------------------------------------------- */

/* Run one experiment from a JSON config (must carry "experiment", "seed",
 * "out_dir"); writes results.csv and manifest.json into out_dir. */
hmmlab_status hmmlab_experiment_run(const char* config_json, char** manifest_path_out);

/* Per-group Spearman trend check over a results CSV; expect is
 * "increasing" or "decreasing". */
hmmlab_status hmmlab_trend_test(const char* csv_path, const char* value_column,
                                const char* group_column, const char* order_column,
                                const char* expect, char** report_out);

#ifdef __cplusplus
}
#endif

#endif /* HMMLAB_H */
