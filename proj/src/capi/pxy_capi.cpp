#include "pxy/pxy.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "pxy/domain.hpp"
#include "pxy/errors.hpp"
#include "pxy/evaluation.hpp"
#include "pxy/gmatrix.hpp"
#include "pxy/methods.hpp"
#include "pxy/synth.hpp"

struct pxy_gmatrix {
    pxy::CategoryAttributeMatrix g;
};
struct pxy_dataset {
    pxy::FeatureDataset data;
    bool labelled = false;
};
struct pxy_ground_truth {
    pxy::GroundTruthSet gt;
};
struct pxy_model {
    pxy::TrainedModel model;
};
struct pxy_scores {
    pxy::ScoreTable table;
};
struct pxy_report {
    pxy::EvalReport report;
};
struct pxy_world {
    pxy::SyntheticWorld world;
};

namespace {

thread_local std::string last_error;

int status_of(pxy::ErrorCode code) {
    using pxy::ErrorCode;
    switch (code) {
        case ErrorCode::invalid_matrix: return PXY_ERR_INVALID_MATRIX;
        case ErrorCode::shape: return PXY_ERR_SHAPE;
        case ErrorCode::degenerate_input: return PXY_ERR_DEGENERATE;
        case ErrorCode::format: return PXY_ERR_FORMAT;
        case ErrorCode::vocabulary: return PXY_ERR_VOCABULARY;
        case ErrorCode::data: return PXY_ERR_DATA;
        case ErrorCode::rank: return PXY_ERR_RANK;
        case ErrorCode::singular: return PXY_ERR_SINGULAR;
        case ErrorCode::training_diverged: return PXY_ERR_DIVERGED;
        case ErrorCode::index: return PXY_ERR_INDEX;
        case ErrorCode::invalid_config: return PXY_ERR_ARGUMENT;
        case ErrorCode::io: return PXY_ERR_IO;
    }
    return PXY_ERR_INTERNAL;
}

int fail(int status, std::string msg) {
    last_error = std::move(msg);
    return status;
}

template <class Fn>
int guarded(Fn&& fn) noexcept {
    try {
        fn();
        last_error.clear();
        return PXY_OK;
    } catch (const pxy::Error& e) {
        return fail(status_of(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(PXY_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PXY_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PXY_ERR_INTERNAL, "unknown error");
    }
}

void need(const void* p, const char* what) {
    if (!p) throw pxy::InvalidConfig(std::string(what) + " must not be null");
}

std::ifstream open_in(const char* path, bool binary = false) {
    need(path, "path");
    std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
    if (!in) throw pxy::IoError(std::string("cannot open ") + path);
    return in;
}

std::ofstream open_out(const char* path, bool binary = false) {
    need(path, "path");
    std::ofstream out(path, binary ? std::ios::out | std::ios::binary | std::ios::trunc : std::ios::out | std::ios::trunc);
    if (!out) throw pxy::IoError(std::string("cannot open ") + path + " for writing");
    return out;
}

void finish(std::ofstream& out, const char* path) {
    out.flush();
    if (!out) throw pxy::IoError(std::string("failed writing ") + path);
}

pxy::MethodParams params_from(const pxy_train_options& o) {
    pxy::MethodParams p;
    p.train.activation_l1 = o.lambda;
    p.train.weight_l1 = o.lambda_l;
    p.train.steps = o.steps;
    p.train.batch = o.batch;
    p.train.learning_rate = o.learning_rate;
    p.train.momentum = o.momentum;
    p.train.decay = o.decay;
    p.train.decay_epochs = o.decay_epochs;
    p.train.seed = o.seed;
    if (o.hidden) p.train.hidden.assign(o.hidden, o.hidden + o.hidden_count);
    else if (o.hidden_count) throw pxy::InvalidConfig("hidden_count given without hidden widths");
    p.lambda_s = o.lambda_s;
    p.lambda1 = o.lambda1;
    p.lambda2 = o.lambda2;
    p.variance_target = o.variance_target;
    p.pre_shift = o.pre_shift;
    p.train.validate();
    return p;
}

void require_labels(const pxy_dataset* d) {
    if (!d->labelled) throw pxy::DataError("dataset was loaded without labels");
}

pxy::ScoreTable score_table(const pxy::Matrix& values, const std::vector<std::string>& columns) {
    pxy::ScoreTable t;
    for (Eigen::Index i = 0; i < values.rows(); ++i) t.ids.push_back(std::to_string(i + 1));
    t.columns = columns;
    t.values = values;
    return t;
}

void check_columns(const std::vector<std::string>& got, const std::vector<std::string>& expected) {
    if (got == expected) return;
    std::vector<std::string> odd;
    for (std::size_t j = 0; j < std::max(got.size(), expected.size()); ++j)
        if (j >= got.size() || j >= expected.size() || got[j] != expected[j])
            odd.push_back(j < got.size() ? got[j] : expected[j]);
    throw pxy::VocabularyError(odd);
}

void write_rank(const pxy::RankLists& lists, const char* path) {
    auto out = open_out(path);
    out << "rank,top,bottom\n";
    for (std::size_t i = 0; i < lists.top.size(); ++i)
        out << (i + 1) << ',' << lists.top[i] << ',' << lists.bottom[i] << '\n';
    finish(out, path);
}

}  // namespace

extern "C" {

const char* pxy_version(void) { return "1.0.0"; }

const char* pxy_last_error(void) { return last_error.c_str(); }

const char* pxy_status_name(int status) {
    switch (status) {
        case PXY_OK: return "ok";
        case PXY_ERR_ARGUMENT: return "invalid argument";
        case PXY_ERR_IO: return "i/o error";
        case PXY_ERR_FORMAT: return "format error";
        case PXY_ERR_VOCABULARY: return "vocabulary error";
        case PXY_ERR_DATA: return "data error";
        case PXY_ERR_SHAPE: return "shape error";
        case PXY_ERR_INVALID_MATRIX: return "invalid matrix";
        case PXY_ERR_DEGENERATE: return "degenerate input";
        case PXY_ERR_RANK: return "rank error";
        case PXY_ERR_SINGULAR: return "singular matrix";
        case PXY_ERR_DIVERGED: return "training diverged";
        case PXY_ERR_INDEX: return "index out of range";
        case PXY_ERR_INTERNAL: return "internal error";
        default: return "unknown status";
    }
}

// ---- G -----------------------------------------------------------------

int pxy_gmatrix_from_embeddings(const char* embeddings_path, const char* elements_path, const char* styles_path,
                                pxy_gmatrix** out) {
    return guarded([&] {
        need(out, "out");
        auto emb = open_in(embeddings_path);
        auto el = open_in(elements_path);
        auto st = open_in(styles_path);
        const pxy::EmbeddingTable table = pxy::parse_embedding_table(emb);
        const pxy::ElementVocabulary elements(pxy::read_name_list(el));
        const pxy::StyleVocabulary styles(pxy::read_name_list(st));
        *out = new pxy_gmatrix{pxy::estimate_g_from_embeddings(table, elements, styles)};
    });
}

int pxy_gmatrix_from_ground_truth(const pxy_ground_truth* gt, size_t per_style, uint64_t seed, pxy_gmatrix** out) {
    return guarded([&] {
        need(gt, "ground truth");
        need(out, "out");
        *out = new pxy_gmatrix{pxy::estimate_g_from_ground_truth(gt->gt, per_style, seed).g};
    });
}

int pxy_gmatrix_load(const char* path, pxy_gmatrix** out) {
    return guarded([&] {
        need(out, "out");
        auto in = open_in(path);
        *out = new pxy_gmatrix{pxy::read_g_csv(in)};
    });
}

int pxy_gmatrix_save(const pxy_gmatrix* g, const char* path) {
    return guarded([&] {
        need(g, "G");
        auto out = open_out(path);
        pxy::write_g_csv(out, g->g);
        finish(out, path);
    });
}

int pxy_gmatrix_perturb(const pxy_gmatrix* g, double magnitude, uint64_t seed, pxy_gmatrix** out) {
    return guarded([&] {
        need(g, "G");
        need(out, "out");
        *out = new pxy_gmatrix{pxy::perturb_g(g->g, magnitude, seed)};
    });
}

int pxy_gmatrix_shape(const pxy_gmatrix* g, size_t* m, size_t* n) {
    return guarded([&] {
        need(g, "G");
        if (m) *m = g->g.rows();
        if (n) *n = g->g.cols();
    });
}

int pxy_gmatrix_values(const pxy_gmatrix* g, double* values) {
    return guarded([&] {
        need(g, "G");
        need(values, "values");
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values, g->g.g.rows(),
                                                                                          g->g.g.cols()) = g->g.g;
    });
}

void pxy_gmatrix_free(pxy_gmatrix* g) { delete g; }

// ---- datasets ------------------------------------------------------------

int pxy_dataset_load(const char* features_path, const char* labels_path, const pxy_gmatrix* g, pxy_dataset** out) {
    return guarded([&] {
        need(out, "out");
        auto f = open_in(features_path, true);
        auto d = std::make_unique<pxy_dataset>();
        if (labels_path) {
            need(g, "G");
            auto l = open_in(labels_path);
            d->data = pxy::read_feature_dataset(f, l, g->g.styles);
            d->labelled = true;
        } else {
            d->data.features = pxy::read_feature_matrix(f);
            if (g) d->data.styles = g->g.styles;
        }
        *out = d.release();
    });
}

int pxy_dataset_shape(const pxy_dataset* data, size_t* k, size_t* d) {
    return guarded([&] {
        need(data, "dataset");
        if (k) *k = static_cast<size_t>(data->data.features.rows());
        if (d) *d = static_cast<size_t>(data->data.features.cols());
    });
}

void pxy_dataset_free(pxy_dataset* data) { delete data; }

// ---- ground truth ----------------------------------------------------------

int pxy_ground_truth_load(const char* path, pxy_ground_truth** out) {
    return guarded([&] {
        need(out, "out");
        auto in = open_in(path);
        *out = new pxy_ground_truth{pxy::read_ground_truth_csv(in)};
    });
}

int pxy_ground_truth_from_survey(const char* sheet_a, const char* sheet_b, const char* sheet_c,
                                 pxy_ground_truth** out) {
    return guarded([&] {
        need(out, "out");
        auto a = open_in(sheet_a);
        auto b = open_in(sheet_b);
        auto c = open_in(sheet_c);
        const std::array<pxy::SurveySheet, 3> sheets = {pxy::read_survey_csv(a), pxy::read_survey_csv(b),
                                                        pxy::read_survey_csv(c)};
        *out = new pxy_ground_truth{pxy::ingest_survey(sheets)};
    });
}

int pxy_ground_truth_save(const pxy_ground_truth* gt, const char* path) {
    return guarded([&] {
        need(gt, "ground truth");
        auto out = open_out(path);
        pxy::write_ground_truth_csv(out, gt->gt);
        finish(out, path);
    });
}

int pxy_ground_truth_shape(const pxy_ground_truth* gt, size_t* k, size_t* m) {
    return guarded([&] {
        need(gt, "ground truth");
        if (k) *k = static_cast<size_t>(gt->gt.ternary.rows());
        if (m) *m = static_cast<size_t>(gt->gt.ternary.cols());
    });
}

void pxy_ground_truth_free(pxy_ground_truth* gt) { delete gt; }

// ---- training ----------------------------------------------------------------

void pxy_train_options_init(pxy_train_options* o) {
    if (!o) return;
    const pxy::MethodParams p;
    *o = pxy_train_options{};
    o->method = "deep-proxy-svd";
    o->lambda = p.train.activation_l1;
    o->lambda_l = p.train.weight_l1;
    o->lambda_s = p.lambda_s;
    o->lambda1 = p.lambda1;
    o->lambda2 = p.lambda2;
    o->variance_target = p.variance_target;
    o->pre_shift = p.pre_shift;
    o->steps = p.train.steps;
    o->batch = p.train.batch;
    o->learning_rate = p.train.learning_rate;
    o->momentum = p.train.momentum;
    o->decay = p.train.decay;
    o->decay_epochs = p.train.decay_epochs;
    o->seed = p.train.seed;
    o->hidden = nullptr;
    o->hidden_count = 0;
}

int pxy_train(const pxy_dataset* data, const pxy_gmatrix* g, const pxy_train_options* options, pxy_model** out) {
    return guarded([&] {
        need(data, "dataset");
        need(g, "G");
        need(options, "options");
        need(options->method, "method");
        need(out, "out");
        require_labels(data);
        const pxy::Method method = pxy::parse_method(options->method);
        *out = new pxy_model{pxy::train_method(method, data->data, g->g, params_from(*options))};
    });
}

int pxy_train_select(const pxy_dataset* data, const pxy_gmatrix* g, const pxy_train_options* options,
                     const double* grid, size_t grid_count, const double* grid2, size_t grid2_count,
                     const pxy_dataset* val_data,
                     const pxy_ground_truth* val_gt, pxy_model** out, size_t* chosen, double* chosen_auc) {
    return guarded([&] {
        need(data, "dataset");
        need(g, "G");
        need(options, "options");
        need(options->method, "method");
        need(grid, "grid");
        need(val_data, "validation dataset");
        need(val_gt, "validation ground truth");
        need(out, "out");
        require_labels(data);
        check_columns(val_gt->gt.elements.names(), g->g.elements.names());
        if (val_gt->gt.ternary.rows() != val_data->data.features.rows())
            throw pxy::ShapeError("validation features and ground truth differ in row count");
        const pxy::Method method = pxy::parse_method(options->method);
        pxy::FeatureDataset val = val_data->data;
        val.styles = g->g.styles;
        pxy::Selection sel = pxy::train_select(method, data->data, g->g, params_from(*options),
                                               std::vector<double>(grid, grid + grid_count), val,
                                               val_gt->gt.binary(),
                                               grid2 ? std::vector<double>(grid2, grid2 + grid2_count)
                                                     : std::vector<double>{});
        if (chosen) *chosen = sel.chosen;
        if (chosen_auc) *chosen_auc = sel.grid[sel.chosen].mean_auc;
        *out = new pxy_model{std::move(sel.model)};
    });
}

int pxy_model_load(const char* path, pxy_model** out) {
    return guarded([&] {
        need(out, "out");
        auto in = open_in(path, true);
        *out = new pxy_model{pxy::read_model(in)};
    });
}

int pxy_model_save(const pxy_model* model, const char* path) {
    return guarded([&] {
        need(model, "model");
        auto out = open_out(path, true);
        pxy::write_model(out, model->model);
        finish(out, path);
    });
}

const char* pxy_model_method(const pxy_model* model) {
    return model ? pxy::to_string(model->model.method).data() : "";
}

void pxy_model_free(pxy_model* model) { delete model; }

// ---- scores ------------------------------------------------------------------

int pxy_predict(const pxy_model* model, const pxy_dataset* data, pxy_scores** out) {
    return guarded([&] {
        need(model, "model");
        need(data, "dataset");
        need(out, "out");
        const pxy::Matrix s = pxy::predict_attribute_scores(model->model, data->data.features);
        *out = new pxy_scores{score_table(s, model->model.g.elements.names())};
    });
}

int pxy_predict_styles(const pxy_model* model, const pxy_dataset* data, pxy_scores** out) {
    return guarded([&] {
        need(model, "model");
        need(data, "dataset");
        need(out, "out");
        const pxy::Matrix s = pxy::predict_style_scores(model->model, data->data.features);
        *out = new pxy_scores{score_table(s, model->model.g.styles.names())};
    });
}

int pxy_scores_load(const char* path, pxy_scores** out) {
    return guarded([&] {
        need(out, "out");
        auto in = open_in(path);
        *out = new pxy_scores{pxy::read_score_csv(in)};
    });
}

int pxy_scores_save(const pxy_scores* scores, const char* path) {
    return guarded([&] {
        need(scores, "scores");
        auto out = open_out(path);
        pxy::write_score_csv(out, scores->table);
        finish(out, path);
    });
}

int pxy_scores_shape(const pxy_scores* scores, size_t* rows, size_t* cols) {
    return guarded([&] {
        need(scores, "scores");
        if (rows) *rows = static_cast<size_t>(scores->table.values.rows());
        if (cols) *cols = static_cast<size_t>(scores->table.values.cols());
    });
}

int pxy_scores_values(const pxy_scores* scores, double* values) {
    return guarded([&] {
        need(scores, "scores");
        need(values, "values");
        const auto& v = scores->table.values;
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values, v.rows(), v.cols()) = v;
    });
}

void pxy_scores_free(pxy_scores* scores) { delete scores; }

// ---- evaluation --------------------------------------------------------------

int pxy_evaluate(const pxy_scores* scores, const pxy_ground_truth* gt, size_t k_group, size_t trials, uint64_t seed,
                 const char* method, pxy_report** out) {
    return guarded([&] {
        need(scores, "scores");
        need(gt, "ground truth");
        need(out, "out");
        std::vector<std::string> cols;
        for (const auto& c : scores->table.columns) cols.push_back(pxy::normalize_term(c));
        check_columns(cols, gt->gt.elements.names());
        pxy::EvalOptions opt;
        opt.k_group = k_group;
        opt.trials = trials;
        opt.seed = seed;
        if (method) opt.method = method;
        *out = new pxy_report{pxy::evaluate(scores->table.values, gt->gt, opt)};
    });
}

int pxy_report_save(const pxy_report* report, const char* report_path, const char* curve_path) {
    return guarded([&] {
        need(report, "report");
        auto out = open_out(report_path);
        pxy::write_report_csv(out, report->report);
        finish(out, report_path);
        if (curve_path) {
            auto c = open_out(curve_path);
            pxy::write_curve_csv(c, report->report);
            finish(c, curve_path);
        }
    });
}

int pxy_report_mean_auc(const pxy_report* report, double* mean_auc) {
    return guarded([&] {
        need(report, "report");
        need(mean_auc, "mean_auc");
        *mean_auc = report->report.mean_auc();
    });
}

int pxy_report_element_count(const pxy_report* report, size_t* count) {
    return guarded([&] {
        need(report, "report");
        need(count, "count");
        *count = report->report.elements.size();
    });
}

int pxy_report_element_auc(const pxy_report* report, size_t element, double* auc) {
    return guarded([&] {
        need(report, "report");
        need(auc, "auc");
        if (element >= report->report.auc.size()) throw pxy::IndexError("element index out of range");
        *auc = report->report.auc[element];
    });
}

void pxy_report_free(pxy_report* report) { delete report; }

int pxy_rank_column(const pxy_scores* scores, const char* column, size_t top, const char* path) {
    return guarded([&] {
        need(scores, "scores");
        need(column, "column");
        const std::string want = pxy::normalize_term(column);
        const auto& cols = scores->table.columns;
        std::size_t j = 0;
        while (j < cols.size() && pxy::normalize_term(cols[j]) != want) ++j;
        if (j == cols.size()) throw pxy::VocabularyError({column});
        write_rank(pxy::rank_table(scores->table.values, scores->table.ids, j, top), path);
    });
}

int pxy_rank_row(const pxy_scores* scores, const char* row_id, size_t top, const char* path) {
    return guarded([&] {
        need(scores, "scores");
        need(row_id, "row id");
        const auto& ids = scores->table.ids;
        std::size_t i = 0;
        while (i < ids.size() && ids[i] != row_id) ++i;
        if (i == ids.size()) throw pxy::VocabularyError({row_id});
        write_rank(pxy::rank_elements(scores->table.values, scores->table.columns, i, top), path);
    });
}

int pxy_random_baseline(const int* labels, size_t count, size_t trials, uint64_t seed, double* mean, double* std) {
    return guarded([&] {
        need(labels, "labels");
        const pxy::BaselineSummary s = pxy::random_baseline({labels, count}, trials, seed);
        if (mean) *mean = s.mean;
        if (std) *std = s.std;
    });
}

int pxy_baseline_save(const pxy_ground_truth* gt, size_t trials, uint64_t seed, const char* path) {
    return guarded([&] {
        need(gt, "ground truth");
        const pxy::TernaryMatrix bin = gt->gt.binary();
        auto out = open_out(path);
        out << "element,random_mean,random_std\n";
        for (Eigen::Index j = 0; j < bin.cols(); ++j) {
            const std::vector<int> l(bin.col(j).data(), bin.col(j).data() + bin.rows());
            out << gt->gt.elements.name(static_cast<std::size_t>(j)) << ',';
            try {
                const auto s = pxy::random_baseline(l, trials, seed);
                out << pxy::format_real(s.mean) << ',' << pxy::format_real(s.std) << '\n';
            } catch (const pxy::DegenerateInput&) {
                out << "NA,NA\n";
            }
        }
        finish(out, path);
    });
}

// ---- synthetic worlds --------------------------------------------------------

int pxy_world_generate(size_t m, size_t n, size_t k, size_t d, double noise, uint64_t seed, pxy_world** out) {
    return guarded([&] {
        need(out, "out");
        *out = new pxy_world{pxy::generate_world(m, n, k, d, noise, seed)};
    });
}

int pxy_world_save(const pxy_world* world, const char* dir) {
    return guarded([&] {
        need(world, "world");
        need(dir, "dir");
        pxy::write_world(dir, world->world);
    });
}

int pxy_world_dataset(const pxy_world* world, pxy_dataset** out) {
    return guarded([&] {
        need(world, "world");
        need(out, "out");
        *out = new pxy_dataset{pxy::world_dataset(world->world), true};
    });
}

int pxy_world_gmatrix(const pxy_world* world, pxy_gmatrix** out) {
    return guarded([&] {
        need(world, "world");
        need(out, "out");
        *out = new pxy_gmatrix{pxy::world_g(world->world)};
    });
}

int pxy_world_recovery(const pxy_world* world, const pxy_scores* scores, double* per_element, double* mean) {
    return guarded([&] {
        need(world, "world");
        need(scores, "scores");
        const auto aucs = pxy::recovery_score(world->world, scores->table.values);
        double sum = 0.0;
        for (std::size_t j = 0; j < aucs.size(); ++j) {
            if (per_element) per_element[j] = aucs[j];
            sum += aucs[j];
        }
        if (mean) *mean = aucs.empty() ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(aucs.size());
    });
}

void pxy_world_free(pxy_world* world) { delete world; }

}  // extern "C"
