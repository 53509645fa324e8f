#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pxy/domain.hpp"
#include "pxy/linear_methods.hpp"
#include "pxy/proxy_nets.hpp"

namespace pxy {

enum class Method : std::uint32_t {
    sparse = 0,
    logistic = 1,
    pca = 2,
    eszsl = 3,
    deep_proxy_plain = 4,
    deep_proxy_svd = 5,
    deep_proxy_offset = 6,
};

std::string_view to_string(Method m);
/// Accepts the hyphenated names (sparse, logistic, pca, eszsl, deep-proxy-plain, ...).
Method parse_method(std::string_view name);
bool is_deep_proxy(Method m);

struct MethodParams {
    TrainConfig train;  // networks; activation_l1 is deep-proxy's lambda, weight_l1 logistic's lambda_L
    double lambda_s = 1e-3;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double variance_target = 0.95;
    double pre_shift = 1.0;
};

/// One trained model of any method, together with the G it was trained against.
struct TrainedModel {
    Method method = Method::sparse;
    CategoryAttributeMatrix g;
    double lambda_s = 0.0;
    std::optional<StyleClassifier> classifier;
    std::optional<LogisticProxyModel> logistic;
    std::optional<PcaProxyModel> pca;
    std::optional<EszslModel> eszsl;
    std::optional<DeepProxyModel> deep;
};

/// Dataset styles must equal G's style axis.
TrainedModel train_method(Method method, const FeatureDataset& data, const CategoryAttributeMatrix& g,
                          const MethodParams& params);

/// k x m attribute scores.
Matrix predict_attribute_scores(const TrainedModel& model, const Matrix& features);
/// k x n style distributions; InvalidConfig for methods without a style output.
Matrix predict_style_scores(const TrainedModel& model, const Matrix& features);

/// The hyperparameter a grid value sets: lambda_s (sparse), lambda_L (logistic),
/// variance target (pca), lambda (deep-proxy). ESZSL searches all pairs of
/// `grid` (lambda1) and `grid2` (lambda2, defaults to `grid`).
std::string_view grid_parameter(Method method);

struct GridPoint {
    double value = 0.0;
    double value2 = 0.0;  // ESZSL's second regulariser
    double mean_auc = 0.0;
};

struct Selection {
    TrainedModel model;
    std::vector<GridPoint> grid;
    std::size_t chosen = 0;
};

/// Trains once per grid value and keeps the model with the best validation mean AUC
/// (first one on ties). `val_labels` is the k_val x m 0/1 relevance matrix.
Selection train_select(Method method, const FeatureDataset& data, const CategoryAttributeMatrix& g,
                       const MethodParams& params, const std::vector<double>& grid, const FeatureDataset& val_data,
                       const TernaryMatrix& val_labels, const std::vector<double>& grid2 = {});

/// "PXYR" container: method, G with its axes, method parameters, CRC-32 trailer.
void write_model(std::ostream& out, const TrainedModel& model);
TrainedModel read_model(std::istream& in);

}  // namespace pxy
