#ifndef PXY_PXY_H
#define PXY_PXY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PXY_API __declspec(dllexport)
#else
#define PXY_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one of these; the message of the
   last failure on the calling thread is available from pxy_last_error(). */
enum {
    PXY_OK = 0,
    PXY_ERR_ARGUMENT = 1,   /* null handle or pointer, bad option value */
    PXY_ERR_IO = 2,
    PXY_ERR_FORMAT = 3,
    PXY_ERR_VOCABULARY = 4,
    PXY_ERR_DATA = 5,
    PXY_ERR_SHAPE = 6,
    PXY_ERR_INVALID_MATRIX = 7,
    PXY_ERR_DEGENERATE = 8,
    PXY_ERR_RANK = 9,
    PXY_ERR_SINGULAR = 10,
    PXY_ERR_DIVERGED = 11,
    PXY_ERR_INDEX = 12,
    PXY_ERR_INTERNAL = 13
};

typedef struct pxy_gmatrix pxy_gmatrix;
typedef struct pxy_dataset pxy_dataset;
typedef struct pxy_ground_truth pxy_ground_truth;
typedef struct pxy_model pxy_model;
typedef struct pxy_scores pxy_scores;
typedef struct pxy_report pxy_report;
typedef struct pxy_world pxy_world;

PXY_API const char* pxy_version(void);
PXY_API const char* pxy_last_error(void);
PXY_API const char* pxy_status_name(int status);

/* ---- category-attribute matrix G (m elements x n styles) ---- */

PXY_API int pxy_gmatrix_from_embeddings(const char* embeddings_path, const char* elements_path,
                                        const char* styles_path, pxy_gmatrix** out);
/* Mean ternary vector of `per_style` sampled paintings per style. */
PXY_API int pxy_gmatrix_from_ground_truth(const pxy_ground_truth* gt, size_t per_style, uint64_t seed,
                                          pxy_gmatrix** out);
PXY_API int pxy_gmatrix_load(const char* path, pxy_gmatrix** out);
PXY_API int pxy_gmatrix_save(const pxy_gmatrix* g, const char* path);
PXY_API int pxy_gmatrix_perturb(const pxy_gmatrix* g, double magnitude, uint64_t seed, pxy_gmatrix** out);
PXY_API int pxy_gmatrix_shape(const pxy_gmatrix* g, size_t* m, size_t* n);
/* Copies G row-major into `values` (m * n doubles). */
PXY_API int pxy_gmatrix_values(const pxy_gmatrix* g, double* values);
PXY_API void pxy_gmatrix_free(pxy_gmatrix* g);

/* ---- feature datasets ---- */

/* Style names are resolved against G's columns. `labels_path` and `g` may be
   NULL when only features are needed (prediction). */
PXY_API int pxy_dataset_load(const char* features_path, const char* labels_path, const pxy_gmatrix* g,
                             pxy_dataset** out);
PXY_API int pxy_dataset_shape(const pxy_dataset* data, size_t* k, size_t* d);
PXY_API void pxy_dataset_free(pxy_dataset* data);

/* ---- attribute ground truth ---- */

PXY_API int pxy_ground_truth_load(const char* path, pxy_ground_truth** out);
/* Majority vote of three annotator survey sheets. */
PXY_API int pxy_ground_truth_from_survey(const char* sheet_a, const char* sheet_b, const char* sheet_c,
                                         pxy_ground_truth** out);
PXY_API int pxy_ground_truth_save(const pxy_ground_truth* gt, const char* path);
PXY_API int pxy_ground_truth_shape(const pxy_ground_truth* gt, size_t* k, size_t* m);
PXY_API void pxy_ground_truth_free(pxy_ground_truth* gt);

/* ---- training ---- */

typedef struct pxy_train_options {
    const char* method;      /* sparse, logistic, pca, eszsl, deep-proxy-plain|svd|offset */
    double lambda;           /* deep-proxy activation L1 */
    double lambda_l;         /* logistic weight L1 */
    double lambda_s;         /* sparse coding L1 */
    double lambda1;          /* ESZSL */
    double lambda2;          /* ESZSL */
    double variance_target;  /* PCA */
    double pre_shift;        /* deep-proxy-offset */
    size_t steps;
    size_t batch;
    double learning_rate;
    double momentum;
    double decay;
    size_t decay_epochs;
    uint64_t seed;
    const size_t* hidden;    /* hidden widths; NULL keeps 2048, 2048, 1024 */
    size_t hidden_count;
} pxy_train_options;

PXY_API void pxy_train_options_init(pxy_train_options* options);
PXY_API int pxy_train(const pxy_dataset* data, const pxy_gmatrix* g, const pxy_train_options* options,
                      pxy_model** out);
/* Trains once per grid value and keeps the best validation mean AUC. The grid
   sets lambda (deep-proxy), lambda_l (logistic), lambda_s (sparse), the
   variance target (pca) or lambda1 (eszsl, paired with every grid2 value;
   grid2 may be NULL to reuse grid). `chosen` and `chosen_auc` may be NULL. */
PXY_API int pxy_train_select(const pxy_dataset* data, const pxy_gmatrix* g, const pxy_train_options* options,
                             const double* grid, size_t grid_count, const double* grid2, size_t grid2_count,
                             const pxy_dataset* val_data,
                             const pxy_ground_truth* val_gt, pxy_model** out, size_t* chosen, double* chosen_auc);
PXY_API int pxy_model_load(const char* path, pxy_model** out);
PXY_API int pxy_model_save(const pxy_model* model, const char* path);
PXY_API const char* pxy_model_method(const pxy_model* model);
PXY_API void pxy_model_free(pxy_model* model);

/* ---- scores (rows = samples) ---- */

/* k x m attribute scores. Row ids are 1-based sample numbers. */
PXY_API int pxy_predict(const pxy_model* model, const pxy_dataset* data, pxy_scores** out);
/* k x n style distributions (sparse and deep-proxy methods only). */
PXY_API int pxy_predict_styles(const pxy_model* model, const pxy_dataset* data, pxy_scores** out);
PXY_API int pxy_scores_load(const char* path, pxy_scores** out);
PXY_API int pxy_scores_save(const pxy_scores* scores, const char* path);
PXY_API int pxy_scores_shape(const pxy_scores* scores, size_t* rows, size_t* cols);
PXY_API int pxy_scores_values(const pxy_scores* scores, double* values);
PXY_API void pxy_scores_free(pxy_scores* scores);

/* ---- evaluation ---- */

/* Scores and ground truth are matched row by row and column by column. */
PXY_API int pxy_evaluate(const pxy_scores* scores, const pxy_ground_truth* gt, size_t k_group, size_t trials,
                         uint64_t seed, const char* method, pxy_report** out);
/* `curve_path` may be NULL. */
PXY_API int pxy_report_save(const pxy_report* report, const char* report_path, const char* curve_path);
PXY_API int pxy_report_mean_auc(const pxy_report* report, double* mean_auc);
PXY_API int pxy_report_element_count(const pxy_report* report, size_t* count);
/* NaN when the element is not evaluable. */
PXY_API int pxy_report_element_auc(const pxy_report* report, size_t element, double* auc);
PXY_API void pxy_report_free(pxy_report* report);

/* Writes `rank,top,bottom` for one score column. */
PXY_API int pxy_rank_column(const pxy_scores* scores, const char* column, size_t top, const char* path);
/* Writes `rank,top,bottom` over the columns of one row. */
PXY_API int pxy_rank_row(const pxy_scores* scores, const char* row_id, size_t top, const char* path);

PXY_API int pxy_random_baseline(const int* labels, size_t count, size_t trials, uint64_t seed, double* mean,
                                double* std);
/* Writes `element,random_mean,random_std` for every element of `gt`. */
PXY_API int pxy_baseline_save(const pxy_ground_truth* gt, size_t trials, uint64_t seed, const char* path);

/* ---- synthetic worlds ---- */

PXY_API int pxy_world_generate(size_t m, size_t n, size_t k, size_t d, double noise, uint64_t seed,
                               pxy_world** out);
/* Writes features.pxy, labels.txt, styles.txt, elements.txt, g_true.csv,
   ground_truth.csv and attributes.csv into `dir`. */
PXY_API int pxy_world_save(const pxy_world* world, const char* dir);
PXY_API int pxy_world_dataset(const pxy_world* world, pxy_dataset** out);
PXY_API int pxy_world_gmatrix(const pxy_world* world, pxy_gmatrix** out);
/* Per-element AUC against the median-split latent attributes; `per_element`
   (m doubles) may be NULL. */
PXY_API int pxy_world_recovery(const pxy_world* world, const pxy_scores* scores, double* per_element,
                               double* mean);
PXY_API void pxy_world_free(pxy_world* world);

#ifdef __cplusplus
}
#endif

#endif
