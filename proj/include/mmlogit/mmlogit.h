/* C interface to the Markov mixture logit library.
 *
 * All functions return MML_OK on success or an error code; on failure
 * mml_last_error() describes the problem for the calling thread. Handles
 * are opaque and must be released with the matching *_free function.
 * Strings and arrays returned through out-parameters are owned by the
 * caller and released with mml_string_free / mml_ints_free /
 * mml_doubles_free.
 */
#ifndef MMLOGIT_H
#define MMLOGIT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MML_OK 0
#define MML_ERR_RUNTIME 1  /* computation failed */
#define MML_ERR_INVALID 2  /* bad input, bad config, parse error */

typedef struct mml_dataset mml_dataset;  /* rectangular panel */
typedef struct mml_model mml_model;      /* fitted model + its spec */

const char* mml_version(void);
const char* mml_last_error(void);

void mml_string_free(char* s);
void mml_ints_free(int* v);
void mml_doubles_free(double* v);

/* --- datasets ------------------------------------------------------- */

/* Long-format CSV with header id,t,y,x1,...,xp. When add_intercept is
 * nonzero and the first covariate column is not identically 1, a
 * constant-1 column is prepended. */
int mml_dataset_read_csv(const char* path, int add_intercept,
                         mml_dataset** out);
int mml_dataset_write_csv(const mml_dataset* data, const char* path);
int mml_dataset_dims(const mml_dataset* data, int* n, int* T, int* p);
/* Pointer stays valid while the dataset handle lives. */
int mml_dataset_id(const mml_dataset* data, int i, const char** id_out);
void mml_dataset_free(mml_dataset* data);

/* --- simulation ------------------------------------------------------ */

/* config_json: either {"preset":"table1", ...overrides} or a full
 * generator configuration. truth_out receives one group label per
 * individual; theta_json_out (optional, may be NULL) receives the
 * generating parameters. */
int mml_simulate(const char* config_json, mml_dataset** data_out,
                 int** truth_out, int* n_out, char** theta_json_out);

/* --- fitting ---------------------------------------------------------- */

/* options_json keys: K (required), L (required), active (default: all),
 * max_iter, rel_tol, n_restarts, seed, threads, window_end (default T). */
int mml_fit(const mml_dataset* data, const char* options_json,
            mml_model** out);
int mml_model_to_json(const mml_model* model, char** json_out);
int mml_model_from_json(const char* json, mml_model** out);
void mml_model_free(mml_model* model);

/* --- clustering ------------------------------------------------------- */

/* assignment_out: length n, labels in 1..L. posterior_out: n*L row-major.
 * Either output may be NULL. */
int mml_cluster(const mml_dataset* data, const mml_model* model,
                int** assignment_out, double** posterior_out, int* n_out,
                int* L_out);

/* --- variable selection ----------------------------------------------- */

/* options_json: fit options plus T1 (required) and refit (default false).
 * Returns the selection trace as JSON. */
int mml_select(const mml_dataset* data, const char* options_json,
               char** trace_json_out);

/* --- simulation study -------------------------------------------------- */

/* options_json: replicates, T1, seed, threads, n_restarts, max_iter,
 * rel_tol, generator (optional; default table1 preset). Returns a JSON
 * summary of exact / over-selection counts. */
int mml_reproduce_sim(const char* options_json, char** summary_json_out);

#ifdef __cplusplus
}
#endif

#endif /* MMLOGIT_H */
