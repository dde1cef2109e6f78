/* turs.h - C API for the TURS rule set learner.
 *
 * All objects are opaque handles released with the matching *_free call.
 * Functions return TURS_OK on success; on failure they return a status code
 * and turs_last_error() gives a thread-local diagnostic message. Strings
 * returned through char** out-parameters are heap-allocated and must be
 * released with turs_string_free.
 */
#ifndef TURS_H
#define TURS_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct turs_dataset turs_dataset;
typedef struct turs_model turs_model;

typedef enum turs_status {
  TURS_OK = 0,
  TURS_ERR_IO = 1,
  TURS_ERR_FORMAT = 2,
  TURS_ERR_INVALID_ARGUMENT = 3,
  TURS_ERR_INTERNAL = 4
} turs_status;

const char* turs_version(void);
/* Message for the last failing call on this thread ("" if none). */
const char* turs_last_error(void);
void turs_string_free(char* s);

/* ------------------------------------------------------------------ data */

/* CSV with header row; categoricals are one-hot encoded, the target column
 * is mapped to dense class indices in first-appearance order. schema_path
 * may be NULL or a file of "column:numeric|categorical" lines. */
turs_status turs_dataset_load_csv(const char* path, const char* target,
                                  const char* schema_path, turs_dataset** out);
void turs_dataset_free(turs_dataset* ds);
int turs_dataset_num_rows(const turs_dataset* ds);
int turs_dataset_num_columns(const turs_dataset* ds);
int turs_dataset_num_classes(const turs_dataset* ds);

/* --------------------------------------------------------------- fitting */

typedef struct turs_fit_options {
  int beam_width;           /* default 10 */
  int n_cutpoints;          /* default 20 */
  int k_stop;               /* default 3 */
  uint64_t seed;            /* default 0 */
  int patience_diversity;   /* default 1 */
  int local_test;           /* default 1 */
  int max_rules;            /* default 0 = unlimited */
  int aux_rank_complementary; /* default 0 */
  int n_threads;            /* default 0 = TURS_THREADS env / hardware */
  const char* trace_path;   /* JSONL growth trace, NULL = off */
} turs_fit_options;

void turs_fit_options_init(turs_fit_options* opts);

turs_status turs_fit(const turs_dataset* ds, const turs_fit_options* opts,
                     turs_model** out);

/* ---------------------------------------------------------------- models */

void turs_model_free(turs_model* m);
int turs_model_num_rules(const turs_model* m);
int turs_model_num_classes(const turs_model* m);
int turs_model_num_columns(const turs_model* m);
int turs_model_total_literals(const turs_model* m);
turs_status turs_model_score(const turs_model* m, double* nll_bits,
                             double* regret_bits, double* model_bits,
                             double* total_bits);
/* Pretty-printed rule list plus the four-line score summary. */
turs_status turs_model_describe(const turs_model* m, char** out);

turs_status turs_model_save(const turs_model* m, const char* path);
turs_status turs_model_load(const char* path, turs_model** out);
turs_status turs_model_to_json(const turs_model* m, char** out);

/* Class probabilities for one row given in the model's column order.
 * `probs` must hold turs_model_num_classes(m) doubles. `provenance` (may be
 * NULL) receives "rule:i" | "union:i,j,..." | "else". */
turs_status turs_predict(const turs_model* m, const double* row, int n_columns,
                         double* probs, char** provenance);

/* Batch prediction: reads a feature CSV (columns matched by name against the
 * model; raw categorical columns are re-encoded), writes one probability
 * column per class plus a provenance column. random_pick != 0 resolves
 * overlaps by picking one covering rule uniformly per row. */
turs_status turs_predict_csv(const turs_model* m, const char* data_csv,
                             const char* out_csv, int random_pick,
                             uint64_t seed);

/* ------------------------------------------------------------ experiments */

/* Stratified k-fold cross-validation. Any of report_json / report_csv /
 * folds_csv may be NULL; `summary` (may be NULL) receives the plain-text
 * per-fold table. */
turs_status turs_cross_validate(const turs_dataset* ds,
                                const turs_fit_options* opts, int folds,
                                const char* report_json, const char* report_csv,
                                const char* folds_csv, char** summary);

/* Synthetic ground-truth data (50 binary features) written as CSV. */
turs_status turs_simulate(int n, uint64_t seed, const char* out_csv);

/* Repeated fits on fresh synthetic data with the MDL local test on and off;
 * writes an optional CSV and returns the two-row text table. */
turs_status turs_ablate(int reps, int n, uint64_t seed,
                        const turs_fit_options* opts, const char* out_csv,
                        char** summary);

#ifdef __cplusplus
}
#endif

#endif /* TURS_H */
