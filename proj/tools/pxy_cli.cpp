// pxy: command-line front end over the C API.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "pxy/pxy.h"

namespace {

enum Exit { ok = 0, usage = 1, data = 2, numeric = 3 };

struct Failure {
    int status;
    std::string message;
};

int exit_code(int status) {
    switch (status) {
        case PXY_OK: return ok;
        case PXY_ERR_ARGUMENT: return usage;
        case PXY_ERR_RANK:
        case PXY_ERR_SINGULAR:
        case PXY_ERR_DIVERGED: return numeric;
        default: return data;
    }
}

void check(int status) {
    if (status != PXY_OK) throw Failure{status, pxy_last_error()};
}

// Owns one C handle.
template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
    operator T*() const { return p; }
};

using GMatrix = Handle<pxy_gmatrix, pxy_gmatrix_free>;
using Dataset = Handle<pxy_dataset, pxy_dataset_free>;
using GroundTruth = Handle<pxy_ground_truth, pxy_ground_truth_free>;
using Model = Handle<pxy_model, pxy_model_free>;
using Scores = Handle<pxy_scores, pxy_scores_free>;
using Report = Handle<pxy_report, pxy_report_free>;
using World = Handle<pxy_world, pxy_world_free>;

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{PXY_ERR_IO, "cannot open " + path};
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", md[i]);
        hex += byte;
    }
    return hex;
}

// Everything a subcommand needs to leave a manifest next to its output.
struct Run {
    CLI::App* cmd = nullptr;
    std::vector<std::string> inputs;
    std::uint64_t seed = 0;
    bool seeded = false;

    void input(const std::string& path) {
        if (!path.empty()) inputs.push_back(path);
    }

    void manifest(const std::string& path) const {
        nlohmann::ordered_json j;
        j["subcommand"] = cmd->get_name();
        j["version"] = pxy_version();
        nlohmann::ordered_json opts = nlohmann::ordered_json::object();
        for (const CLI::Option* o : cmd->get_options()) {
            if (o->get_lnames().empty() || o->get_lnames()[0] == "help") continue;
            const auto& name = o->get_lnames()[0];
            if (o->count() > 0) {
                const auto& r = o->results();
                if (o->get_expected_max() > 1 || r.size() > 1) opts[name] = r;
                else opts[name] = r.empty() ? std::string() : r.front();
            } else if (!o->get_default_str().empty()) {
                opts[name] = o->get_default_str();
            }
        }
        j["options"] = opts;
        nlohmann::ordered_json ins = nlohmann::ordered_json::array();
        for (const auto& p : inputs) ins.push_back({{"path", p}, {"sha256", sha256_file(p)}});
        j["inputs"] = ins;
        if (seeded) j["seed"] = seed;
        else j["seed"] = nullptr;
        std::ofstream out(path);
        out << j.dump(2) << '\n';
        if (!out) throw Failure{PXY_ERR_IO, "cannot write " + path};
    }
};

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

const char* help_footer =
    "Formats:\n"
    "  features   .pxy: \"PXY1\", u32 k, u32 d, k*d float32, little-endian, row-major\n"
    "  labels     one style name per line, aligned with feature rows\n"
    "  G          CSV element,<style1>,...,<styleN>; one row per element\n"
    "  ground     CSV painting_id,style,<element1>,...; cells -1, 0 or 1\n"
    "  survey     CSV as ground truth; cells relevant|somewhat|irrelevant or 1|0|-1\n"
    "  scores     CSV id,<column1>,...\n"
    "  embeddings text: token followed by d whitespace-separated reals per line\n"
    "Every output is accompanied by <out>.manifest.json (for synth: <dir>/manifest.json).";

struct TrainArgs {
    std::string features, labels, g, method = "deep-proxy-svd", variant, out;
    std::vector<double> lambda, lambda_l, lambda_s, lambda1, lambda2, variance_target;
    double pre_shift = 1.0;
    std::size_t steps = 200000, batch = 32, decay_epochs = 2;
    double lr = 1e-3, momentum = 0.9, decay = 0.94;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden;
    std::string val_features, val_labels, val_ground_truth;
};

std::string resolved_method(const TrainArgs& a) {
    if (a.variant.empty()) return a.method;
    if (a.method != "deep-proxy" && a.method.rfind("deep-proxy", 0) != 0)
        throw Failure{PXY_ERR_ARGUMENT, "--variant only applies to deep-proxy"};
    return "deep-proxy-" + a.variant;
}

double single(const std::vector<double>& v, double fallback) { return v.empty() ? fallback : v.front(); }

int cmd_train(const TrainArgs& a, Run& run) {
    GMatrix g;
    check(pxy_gmatrix_load(a.g.c_str(), g.out()));
    Dataset data;
    check(pxy_dataset_load(a.features.c_str(), a.labels.c_str(), g, data.out()));
    run.input(a.features);
    run.input(a.labels);
    run.input(a.g);
    run.seed = a.seed;
    run.seeded = true;

    const std::string method = resolved_method(a);
    pxy_train_options o;
    pxy_train_options_init(&o);
    o.method = method.c_str();
    o.lambda = single(a.lambda, o.lambda);
    o.lambda_l = single(a.lambda_l, o.lambda_l);
    o.lambda_s = single(a.lambda_s, o.lambda_s);
    o.lambda1 = single(a.lambda1, o.lambda1);
    o.lambda2 = single(a.lambda2, o.lambda2);
    o.variance_target = single(a.variance_target, o.variance_target);
    o.pre_shift = a.pre_shift;
    o.steps = a.steps;
    o.batch = a.batch;
    o.learning_rate = a.lr;
    o.momentum = a.momentum;
    o.decay = a.decay;
    o.decay_epochs = a.decay_epochs;
    o.seed = a.seed;
    if (!a.hidden.empty()) {
        o.hidden = a.hidden.data();
        o.hidden_count = a.hidden.size();
    }

    std::vector<double> grid, grid2;
    if (method == "logistic") grid = a.lambda_l;
    else if (method == "sparse") grid = a.lambda_s;
    else if (method == "pca") grid = a.variance_target;
    else if (method == "eszsl") {
        grid = a.lambda1;
        grid2 = a.lambda2;
        if (grid.empty() && !grid2.empty()) grid.push_back(o.lambda1);
        if (grid2.empty() && !grid.empty()) grid2.push_back(o.lambda2);
    } else grid = a.lambda;

    const bool has_val = !a.val_features.empty();
    const bool select = grid.size() > 1 || grid2.size() > 1;
    Model model;
    if (select || has_val) {
        if (!has_val || a.val_labels.empty() || a.val_ground_truth.empty())
            throw Failure{PXY_ERR_ARGUMENT,
                          "grid selection needs --val-features, --val-labels and --val-ground-truth"};
        if (grid.empty()) throw Failure{PXY_ERR_ARGUMENT, "validation data given but no grid values"};
        Dataset val;
        check(pxy_dataset_load(a.val_features.c_str(), a.val_labels.c_str(), g, val.out()));
        GroundTruth val_gt;
        check(pxy_ground_truth_load(a.val_ground_truth.c_str(), val_gt.out()));
        run.input(a.val_features);
        run.input(a.val_labels);
        run.input(a.val_ground_truth);
        std::size_t chosen = 0;
        double best = 0.0;
        check(pxy_train_select(data, g, &o, grid.data(), grid.size(), grid2.empty() ? nullptr : grid2.data(),
                               grid2.size(), val, val_gt, model.out(), &chosen, &best));
        std::cout << "selected grid point " << chosen << " (validation mean AUC " << best << ")\n";
    } else {
        check(pxy_train(data, g, &o, model.out()));
    }
    check(pxy_model_save(model, a.out.c_str()));
    run.manifest(manifest_path(a.out));
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attribute proxy learning from style labels and a category-attribute matrix"};
    app.footer(help_footer);
    app.require_subcommand(1);
    Run run;

    // estimate-g
    std::string emb, elements, styles, gt_path, out;
    std::size_t per_style = 10;
    std::uint64_t seed = 0;
    auto* estimate = app.add_subcommand("estimate-g", "Build G from word embeddings or from attribute ground truth");
    estimate->add_option("--embeddings", emb, "Embedding table (token v1 ... vd per line)")->check(CLI::ExistingFile);
    estimate->add_option("--elements", elements, "Element names, one per line")->check(CLI::ExistingFile);
    estimate->add_option("--styles", styles, "Style names, one per line")->check(CLI::ExistingFile);
    estimate->add_option("--ground-truth", gt_path, "Ground-truth CSV (alternative to embeddings)")
        ->check(CLI::ExistingFile);
    estimate->add_option("--per-style", per_style, "Paintings averaged per style for ground-truth G")
        ->capture_default_str();
    estimate->add_option("--seed", seed, "Sampling seed for ground-truth G")->capture_default_str();
    estimate->add_option("--out", out, "Output G CSV")->required();

    // train
    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train one proxy method; repeated grid flags select by validation AUC");
    train->add_option("--features", ta.features, "Training features (.pxy)")->required()->check(CLI::ExistingFile);
    train->add_option("--labels", ta.labels, "Training style labels")->required()->check(CLI::ExistingFile);
    train->add_option("--g", ta.g, "G CSV; its columns define the style vocabulary")->required()->check(CLI::ExistingFile);
    train->add_option("--method", ta.method,
                      "sparse, logistic, pca, eszsl, deep-proxy-plain, deep-proxy-svd, deep-proxy-offset")
        ->capture_default_str();
    train->add_option("--variant", ta.variant, "plain, svd or offset (with --method deep-proxy)");
    train->add_option("--lambda", ta.lambda, "Deep-proxy activation L1 weight (repeatable grid)");
    train->add_option("--lambda-l", ta.lambda_l, "Logistic weight L1 (repeatable grid)");
    train->add_option("--lambda-s", ta.lambda_s, "Sparse-coding L1 (repeatable grid)");
    train->add_option("--lambda1", ta.lambda1, "ESZSL feature-side ridge (repeatable grid)");
    train->add_option("--lambda2", ta.lambda2, "ESZSL attribute-side ridge (repeatable grid)");
    train->add_option("--variance-target", ta.variance_target, "PCA retained variance, default 0.95 (repeatable grid)");
    train->add_option("--pre-shift", ta.pre_shift, "Offset variant pre-shift")->capture_default_str();
    train->add_option("--steps", ta.steps, "SGD steps")->capture_default_str();
    train->add_option("--batch", ta.batch, "Batch size")->capture_default_str();
    train->add_option("--lr", ta.lr, "Initial learning rate")->capture_default_str();
    train->add_option("--momentum", ta.momentum, "Momentum")->capture_default_str();
    train->add_option("--decay", ta.decay, "Learning-rate decay factor")->capture_default_str();
    train->add_option("--decay-epochs", ta.decay_epochs, "Epochs between decays")->capture_default_str();
    train->add_option("--seed", ta.seed, "Initialisation and shuffling seed")->capture_default_str();
    train->add_option("--hidden", ta.hidden, "Hidden widths (repeatable; default 2048 2048 1024)");
    train->add_option("--val-features", ta.val_features, "Validation features for grid selection")
        ->check(CLI::ExistingFile);
    train->add_option("--val-labels", ta.val_labels, "Validation style labels")->check(CLI::ExistingFile);
    train->add_option("--val-ground-truth", ta.val_ground_truth, "Validation attribute ground truth")
        ->check(CLI::ExistingFile);
    train->add_option("--out", ta.out, "Output model (.pxyr)")->required();

    // predict
    std::string model_path, features, styles_out;
    auto* predict = app.add_subcommand("predict", "Score attributes (and optionally styles) for a feature file");
    predict->add_option("--model", model_path, "Trained model")->required()->check(CLI::ExistingFile);
    predict->add_option("--features", features, "Features (.pxy)")->required()->check(CLI::ExistingFile);
    predict->add_option("--out", out, "Attribute score CSV")->required();
    predict->add_option("--styles-out", styles_out, "Style distribution CSV (sparse and deep-proxy only)");

    // eval
    std::string predictions, curve_out, method_name;
    std::size_t k_group = 3, trials = 0;
    auto* eval = app.add_subcommand("eval", "Per-element AUC, AP, random baseline and AUC@K curve");
    eval->add_option("--predictions", predictions, "Attribute score CSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--ground-truth", gt_path, "Ground-truth CSV, rows aligned with the scores")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--k-group", k_group, "AUC@K group size")->capture_default_str();
    eval->add_option("--trials", trials, "Random-baseline trials per element (0 skips)")->capture_default_str();
    eval->add_option("--seed", seed, "Random-baseline seed")->capture_default_str();
    eval->add_option("--method", method_name, "Method name recorded in the report");
    eval->add_option("--out", out, "Report CSV")->required();
    eval->add_option("--curve-out", curve_out, "AUC@K curve CSV (default <out>.curve.csv)");

    // rank
    std::string element, item;
    std::size_t top = 5;
    auto* rank = app.add_subcommand("rank", "Top and bottom items for an element, or elements for an item");
    rank->add_option("--predictions", predictions, "Score CSV")->required()->check(CLI::ExistingFile);
    auto* element_opt = rank->add_option("--element", element, "Column to rank items by");
    auto* item_opt = rank->add_option("--item", item, "Row id whose columns are ranked");
    element_opt->excludes(item_opt);
    rank->add_option("--top", top, "List length")->capture_default_str();
    rank->add_option("--out", out, "Output CSV rank,top,bottom")->required();

    // baseline
    auto* baseline = app.add_subcommand("baseline", "Random-ordering AUC per element of a ground truth");
    baseline->add_option("--ground-truth", gt_path, "Ground-truth CSV")->required()->check(CLI::ExistingFile);
    baseline->add_option("--trials", trials, "Random orderings per element")->capture_default_str();
    baseline->add_option("--seed", seed, "Seed; trial t uses seed + t")->capture_default_str();
    baseline->add_option("--out", out, "Output CSV element,random_mean,random_std")->required();

    // synth
    std::size_t m = 12, n = 6, k = 2000, d = 64;
    double noise = 0.1;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic world with known latent attributes");
    synth->add_option("--m", m, "Elements")->capture_default_str();
    synth->add_option("--n", n, "Styles")->capture_default_str();
    synth->add_option("--k", k, "Samples")->capture_default_str();
    synth->add_option("--d", d, "Feature dimension")->capture_default_str();
    synth->add_option("--noise", noise, "Feature noise std")->capture_default_str();
    synth->add_option("--seed", seed, "World seed")->capture_default_str();
    synth->add_option("--out", out, "Output directory")->required();

    // perturb-g
    std::string g_path;
    double magnitude = 0.3;
    auto* perturb = app.add_subcommand("perturb-g", "Add seeded Gaussian noise with norm magnitude * ||G||_F");
    perturb->add_option("--g", g_path, "G CSV")->required()->check(CLI::ExistingFile);
    perturb->add_option("--magnitude", magnitude, "Relative Frobenius norm of the perturbation")->capture_default_str();
    perturb->add_option("--seed", seed, "Perturbation seed")->capture_default_str();
    perturb->add_option("--out", out, "Output G CSV")->required();

    // ingest-survey
    std::vector<std::string> sheets;
    auto* survey = app.add_subcommand("ingest-survey", "Majority-vote three annotator sheets into a ground truth");
    survey->add_option("--survey", sheets, "Annotator sheet (give exactly three)")
        ->required()
        ->expected(3)
        ->check(CLI::ExistingFile);
    survey->add_option("--out", out, "Output ground-truth CSV")->required();

    for (auto* sub : app.get_subcommands({})) sub->footer(help_footer);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        if (*estimate) {
            run.cmd = estimate;
            GMatrix g;
            if (!gt_path.empty()) {
                if (!emb.empty()) throw Failure{PXY_ERR_ARGUMENT, "give either --embeddings or --ground-truth"};
                GroundTruth gt;
                check(pxy_ground_truth_load(gt_path.c_str(), gt.out()));
                check(pxy_gmatrix_from_ground_truth(gt, per_style, seed, g.out()));
                run.input(gt_path);
                run.seed = seed;
                run.seeded = true;
            } else {
                if (emb.empty() || elements.empty() || styles.empty())
                    throw Failure{PXY_ERR_ARGUMENT, "--embeddings needs --elements and --styles"};
                check(pxy_gmatrix_from_embeddings(emb.c_str(), elements.c_str(), styles.c_str(), g.out()));
                run.input(emb);
                run.input(elements);
                run.input(styles);
            }
            check(pxy_gmatrix_save(g, out.c_str()));
            run.manifest(manifest_path(out));
        } else if (*train) {
            run.cmd = train;
            return cmd_train(ta, run);
        } else if (*predict) {
            run.cmd = predict;
            Model model;
            check(pxy_model_load(model_path.c_str(), model.out()));
            Dataset data;
            check(pxy_dataset_load(features.c_str(), nullptr, nullptr, data.out()));
            Scores scores;
            check(pxy_predict(model, data, scores.out()));
            check(pxy_scores_save(scores, out.c_str()));
            if (!styles_out.empty()) {
                Scores st;
                check(pxy_predict_styles(model, data, st.out()));
                check(pxy_scores_save(st, styles_out.c_str()));
            }
            run.input(model_path);
            run.input(features);
            run.manifest(manifest_path(out));
        } else if (*eval) {
            run.cmd = eval;
            Scores scores;
            check(pxy_scores_load(predictions.c_str(), scores.out()));
            GroundTruth gt;
            check(pxy_ground_truth_load(gt_path.c_str(), gt.out()));
            Report report;
            check(pxy_evaluate(scores, gt, k_group, trials, seed, method_name.c_str(), report.out()));
            if (curve_out.empty()) curve_out = out + ".curve.csv";
            check(pxy_report_save(report, out.c_str(), curve_out.c_str()));
            double mean = 0.0;
            check(pxy_report_mean_auc(report, &mean));
            std::cout << "mean AUC " << mean << '\n';
            run.input(predictions);
            run.input(gt_path);
            run.seed = seed;
            run.seeded = trials > 0;
            run.manifest(manifest_path(out));
        } else if (*rank) {
            run.cmd = rank;
            if (element.empty() == item.empty()) throw Failure{PXY_ERR_ARGUMENT, "give exactly one of --element or --item"};
            Scores scores;
            check(pxy_scores_load(predictions.c_str(), scores.out()));
            if (!element.empty()) check(pxy_rank_column(scores, element.c_str(), top, out.c_str()));
            else check(pxy_rank_row(scores, item.c_str(), top, out.c_str()));
            run.input(predictions);
            run.manifest(manifest_path(out));
        } else if (*baseline) {
            run.cmd = baseline;
            if (trials == 0) throw Failure{PXY_ERR_ARGUMENT, "--trials must be at least 1"};
            GroundTruth gt;
            check(pxy_ground_truth_load(gt_path.c_str(), gt.out()));
            check(pxy_baseline_save(gt, trials, seed, out.c_str()));
            run.input(gt_path);
            run.seed = seed;
            run.seeded = true;
            run.manifest(manifest_path(out));
        } else if (*synth) {
            run.cmd = synth;
            World world;
            check(pxy_world_generate(m, n, k, d, noise, seed, world.out()));
            check(pxy_world_save(world, out.c_str()));
            run.seed = seed;
            run.seeded = true;
            run.manifest((std::filesystem::path(out) / "manifest.json").string());
        } else if (*perturb) {
            run.cmd = perturb;
            GMatrix g, p;
            check(pxy_gmatrix_load(g_path.c_str(), g.out()));
            check(pxy_gmatrix_perturb(g, magnitude, seed, p.out()));
            check(pxy_gmatrix_save(p, out.c_str()));
            run.input(g_path);
            run.seed = seed;
            run.seeded = true;
            run.manifest(manifest_path(out));
        } else if (*survey) {
            run.cmd = survey;
            GroundTruth gt;
            check(pxy_ground_truth_from_survey(sheets[0].c_str(), sheets[1].c_str(), sheets[2].c_str(), gt.out()));
            check(pxy_ground_truth_save(gt, out.c_str()));
            for (const auto& s : sheets) run.input(s);
            run.manifest(manifest_path(out));
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << pxy_status_name(f.status) << ": " << f.message << '\n';
        return exit_code(f.status);
    }
    return ok;
}
