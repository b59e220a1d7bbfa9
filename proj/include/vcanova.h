/* C interface to the vcanova library: ANOVA for balanced fixed/random/mixed
 * models, exact sum-of-squares sampling laws via chi-square compounding, and
 * a seeded Monte Carlo verification harness.
 *
 * All handles are opaque and owned by the caller (free with the matching
 * vca_*_free). Functions return VCA_OK on success; on error the return code
 * classifies the failure and vca_last_error() gives a one-line message for
 * the calling thread. Strings returned through out-parameters are allocated
 * by the library and released with vca_string_free().
 */
#ifndef VCANOVA_H
#define VCANOVA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vca_status {
  VCA_OK = 0,
  VCA_ERROR_INVALID = 1, /* malformed input, unbalanced data, bad parameters */
  VCA_ERROR_INTERNAL = 2
} vca_status;

typedef struct vca_model vca_model;     /* design spec + scenario parameters */
typedef struct vca_dataset vca_dataset; /* validated balanced response array */
typedef struct vca_table vca_table;     /* computed ANOVA table */
typedef struct vca_report vca_report;   /* verification report */

const char* vca_version(void);

/* Message for the last failing call on this thread. */
const char* vca_last_error(void);

void vca_string_free(char* s);

/* --- model ------------------------------------------------------------- */

/* Parses a model JSON document:
 *   {"design": "one_way"|"rcbd"|"two_way_interaction"|"split_plot",
 *    "factors": [{"name": ..., "levels": ..., "kind": "fixed"|"random"}, ...],
 *    "replicates": n, "interaction": "fixed"|"random"}
 * Unknown fields are rejected. */
vca_status vca_model_parse(const char* json_text, vca_model** out_model);
vca_status vca_model_to_json(const vca_model* model, char** out_json);
void vca_model_free(vca_model* model);

/* Scenario parameters; terms are factor names, the interaction name "A:B",
 * or "WholePlot" for the split-plot whole-plot error variance. */
vca_status vca_model_set_mu(vca_model* model, double mu);
vca_status vca_model_set_error_variance(vca_model* model, double sigma2);
vca_status vca_model_set_variance(vca_model* model, const char* term, double value);
vca_status vca_model_set_effects(vca_model* model, const char* term, const double* values,
                                 size_t count);

/* --- data -------------------------------------------------------------- */

/* CSV with a header row: one column per factor plus a numeric column "y".
 * Validates balance; errors name the offending cell or label. */
vca_status vca_dataset_parse_csv(const vca_model* model, const char* csv_text,
                                 vca_dataset** out_dataset);
vca_status vca_dataset_to_csv(const vca_dataset* dataset, char** out_csv);
void vca_dataset_free(vca_dataset* dataset);

/* Simulates one dataset from the model's parameters. Deterministic for a
 * fixed seed. */
vca_status vca_simulate(const vca_model* model, uint64_t seed, vca_dataset** out_dataset);

/* --- analysis ---------------------------------------------------------- */

vca_status vca_analyze(const vca_model* model, const vca_dataset* dataset, vca_table** out_table);
/* format: "text", "csv" or "json". */
vca_status vca_table_render(const vca_table* table, const char* format, char** out_text);
void vca_table_free(vca_table* table);

/* Exact sampling law of every sum of squares, as JSON. */
vca_status vca_ss_laws(const vca_model* model, char** out_json);

/* Rejection probability of each F test at level alpha, as JSON. */
vca_status vca_power(const vca_model* model, double alpha, char** out_json);

/* --- verification ------------------------------------------------------ */

/* Runs the Monte Carlo verification harness: per-source distribution checks
 * (moments + KS), pairwise SS correlations, F rejection rates at each alpha,
 * and compounding-lemma checks. inject_wrong_laws != 0 perturbs the laws
 * under test (negative control; the run should then fail). */
vca_status vca_verify(const vca_model* model, uint64_t reps, uint64_t master_seed,
                      unsigned workers, const double* alphas, size_t alpha_count,
                      int inject_wrong_laws, vca_report** out_report);

vca_status vca_report_passed(const vca_report* report, int* out_passed);
vca_status vca_report_json(const vca_report* report, char** out_json);
vca_status vca_report_summary(const vca_report* report, char** out_text);
void vca_report_free(vca_report* report);

#ifdef __cplusplus
}
#endif

#endif
