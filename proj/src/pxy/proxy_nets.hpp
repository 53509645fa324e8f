#pragma once

#include <iosfwd>

#include "pxy/domain.hpp"
#include "pxy/gmatrix.hpp"
#include "pxy/neural.hpp"

namespace pxy {

/// Softmax style classifier input -> hidden... -> n; supplies f_S for sparse coding.
struct StyleClassifier {
    MlpModel net;
    TrainConfig config;
};

/// Trainable stack input -> hidden... -> m (linear), then the fixed G* map with softmax.
struct DeepProxyModel {
    MlpModel net;  // net.terminal mirrors gstar.matrix()
    GStar gstar;
    TrainConfig config;
};

/// Stack input -> hidden... -> m with a sigmoid on the attribute layer.
struct LogisticProxyModel {
    MlpModel net;
    Matrix targets;  // m x n, entries in [0, 1]
    TrainConfig config;
};

/// Mean softmax cross-entropy of f_A^t G* plus config.activation_l1 * mean ||f_A||_1.
/// For the offset variant o is updated with its own momentum buffer, projected
/// onto o >= 0, and G* is rebuilt after every batch.
DeepProxyModel train_deep_proxy(const FeatureDataset& data, const Matrix& g, GStarVariant variant,
                                const TrainConfig& config, double pre_shift = 1.0);

/// Starting network for deep-proxy; exposed so gradients can be checked on it.
DeepProxyModel init_deep_proxy(std::size_t input_dim, const Matrix& g, GStarVariant variant,
                               const TrainConfig& config, double pre_shift = 1.0);

/// Summed sigmoid cross-entropy against the style's target column, averaged over
/// the batch, plus config.weight_l1 * ||W_attr||_1.
LogisticProxyModel train_logistic(const FeatureDataset& data, const Matrix& g, const TrainConfig& config);

LogisticProxyModel init_logistic(std::size_t input_dim, const Matrix& g, const TrainConfig& config);

/// Mean softmax cross-entropy over the dataset's styles.
StyleClassifier train_style_classifier(const FeatureDataset& data, const TrainConfig& config);
Matrix predict_styles(const StyleClassifier& model, const Matrix& features);

/// Attribute targets from G: v -> (v + 1) / 2 when every entry lies in [-1, 1];
/// otherwise positives scale into [0.5, 1] by the largest positive and
/// negatives into [0, 0.5] by the largest magnitude negative. Zero maps to 0.5.
Matrix logistic_targets(const Matrix& g);

/// Objective value and gradients on one batch.
struct BatchLoss {
    double value = 0.0;
    Gradients grads;
};
BatchLoss deep_proxy_loss(const DeepProxyModel& model, const Matrix& batch, const std::vector<std::size_t>& labels);
BatchLoss logistic_loss(const LogisticProxyModel& model, const Matrix& batch, const std::vector<std::size_t>& labels);

/// Pre-terminal linear activations, b x m.
Matrix predict_attributes(const DeepProxyModel& model, const Matrix& features);
/// Sigmoid outputs, b x m.
Matrix predict_attributes(const LogisticProxyModel& model, const Matrix& features);
/// Softmax over f_A^t G*, b x n.
Matrix predict_styles(const DeepProxyModel& model, const Matrix& features);

void write_deep_proxy(std::ostream& out, const DeepProxyModel& model);
DeepProxyModel read_deep_proxy(std::istream& in);
void write_style_classifier(std::ostream& out, const StyleClassifier& model);
StyleClassifier read_style_classifier(std::istream& in);
void write_logistic(std::ostream& out, const LogisticProxyModel& model);
LogisticProxyModel read_logistic(std::istream& in);

}  // namespace pxy
