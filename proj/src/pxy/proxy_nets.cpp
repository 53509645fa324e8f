#include "pxy/proxy_nets.hpp"

#include <cmath>
#include <string>

#include "pxy/errors.hpp"

namespace pxy {

namespace {

void check_training_inputs(const FeatureDataset& data, const Matrix& g) {
    if (data.features.rows() == 0) throw DataError("empty training set");
    if (static_cast<std::size_t>(data.features.rows()) != data.labels.size())
        throw ShapeError("feature rows and labels differ in count");
    if (g.cols() != static_cast<Eigen::Index>(data.styles.size()))
        throw ShapeError("G has " + std::to_string(g.cols()) + " columns but the dataset has " +
                         std::to_string(data.styles.size()) + " styles");
    require_finite(data.features, "features");
    require_finite(g, "G");
}

std::vector<LayerSpec> stack_spec(const TrainConfig& config, std::size_t m, Activation attr) {
    std::vector<LayerSpec> specs;
    for (const auto h : config.hidden) specs.push_back({h, Activation::relu});
    specs.push_back({m, attr});
    return specs;
}

void check_features(const MlpModel& net, const Matrix& features) {
    if (features.cols() != net.input_dim())
        throw ShapeError("features have " + std::to_string(features.cols()) + " columns, model expects " +
                         std::to_string(net.input_dim()));
}

// Runs SGD with momentum; `after_step` sees the gradients once the weights moved.
template <class Model, class LossFn, class AfterStep>
void run_sgd(Model& model, const FeatureDataset& data, LossFn loss_fn, AfterStep after_step) {
    const TrainConfig& cfg = model.config;
    const auto k = static_cast<std::size_t>(data.features.rows());
    BatchSampler sampler(k, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    Velocity velocity = Velocity::zeros_like(model.net);
    std::vector<std::size_t> labels;
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const auto rows = sampler.next(cfg.batch);
        labels.clear();
        for (auto r : rows) labels.push_back(data.labels[r]);
        BatchLoss bl = loss_fn(model, gather_rows(data.features, rows), labels);
        if (!std::isfinite(bl.value)) throw TrainingDiverged(step);
        sgd_momentum_step(model.net, bl.grads, velocity, cfg, step, k);
        after_step(bl.grads, step);
    }
}

}  // namespace

DeepProxyModel init_deep_proxy(std::size_t input_dim, const Matrix& g, GStarVariant variant,
                               const TrainConfig& config, double pre_shift) {
    config.validate();
    DeepProxyModel model;
    model.config = config;
    model.gstar = GStar::build(g, variant, pre_shift);
    std::mt19937_64 rng(config.seed);
    model.net = make_mlp(input_dim, stack_spec(config, static_cast<std::size_t>(g.rows()), Activation::linear), rng);
    model.net.terminal = FixedTerminal{model.gstar.matrix(), Activation::softmax};
    return model;
}

BatchLoss deep_proxy_loss(const DeepProxyModel& model, const Matrix& batch, const std::vector<std::size_t>& labels) {
    const Activations acts = forward_pass(model.net, batch);
    const LossResult ce = softmax_cross_entropy(acts.logits(), labels);
    Penalties pen;
    pen.activation_l1 = model.config.activation_l1;
    pen.activation_stage = model.net.layers.size() - 1;
    BatchLoss out;
    out.value = ce.value + penalty_value(model.net, acts, pen);
    out.grads = backward_pass(model.net, acts, ce.grad, pen);
    return out;
}

DeepProxyModel train_deep_proxy(const FeatureDataset& data, const Matrix& g, GStarVariant variant,
                                const TrainConfig& config, double pre_shift) {
    check_training_inputs(data, g);
    DeepProxyModel model = init_deep_proxy(static_cast<std::size_t>(data.features.cols()), g, variant, config, pre_shift);
    const auto k = static_cast<std::size_t>(data.features.rows());
    Vector offset_velocity = Vector::Zero(g.rows());
    run_sgd(model, data, deep_proxy_loss, [&](const Gradients& grads, std::size_t step) {
        if (variant != GStarVariant::offset) return;
        const Vector d_o = model.gstar.offset_gradient(*grads.terminal);
        offset_velocity = config.momentum * offset_velocity - learning_rate(config, step, k) * d_o;
        model.gstar.set_offset(model.gstar.offset() + offset_velocity);
        model.net.terminal->map = model.gstar.matrix();
    });
    return model;
}

StyleClassifier train_style_classifier(const FeatureDataset& data, const TrainConfig& config) {
    config.validate();
    if (data.features.rows() == 0) throw DataError("empty training set");
    if (static_cast<std::size_t>(data.features.rows()) != data.labels.size())
        throw ShapeError("feature rows and labels differ in count");
    require_finite(data.features, "features");
    StyleClassifier model;
    model.config = config;
    std::mt19937_64 rng(config.seed);
    model.net = make_mlp(static_cast<std::size_t>(data.features.cols()),
                         stack_spec(config, data.styles.size(), Activation::softmax), rng);
    auto loss = [](const StyleClassifier& m, const Matrix& batch, const std::vector<std::size_t>& labels) {
        const Activations acts = forward_pass(m.net, batch);
        const LossResult ce = softmax_cross_entropy(acts.logits(), labels);
        return BatchLoss{ce.value, backward_pass(m.net, acts, ce.grad)};
    };
    run_sgd(model, data, loss, [](const Gradients&, std::size_t) {});
    return model;
}

Matrix predict_styles(const StyleClassifier& model, const Matrix& features) {
    check_features(model.net, features);
    return forward_pass(model.net, features).output();
}

Matrix logistic_targets(const Matrix& g) {
    require_finite(g, "G");
    if (g.size() == 0) return g;
    if (g.cwiseAbs().maxCoeff() <= 1.0) return (g.array() + 1.0) / 2.0;
    const double max_pos = g.maxCoeff();
    const double max_neg = -g.minCoeff();
    return g.unaryExpr([&](double v) {
        if (v > 0.0) return 0.5 + 0.5 * v / max_pos;
        if (v < 0.0) return 0.5 + 0.5 * v / max_neg;
        return 0.5;
    });
}

LogisticProxyModel init_logistic(std::size_t input_dim, const Matrix& g, const TrainConfig& config) {
    config.validate();
    LogisticProxyModel model;
    model.config = config;
    model.targets = logistic_targets(g);
    std::mt19937_64 rng(config.seed);
    model.net = make_mlp(input_dim, stack_spec(config, static_cast<std::size_t>(g.rows()), Activation::sigmoid), rng);
    return model;
}

BatchLoss logistic_loss(const LogisticProxyModel& model, const Matrix& batch, const std::vector<std::size_t>& labels) {
    Matrix target(static_cast<Eigen::Index>(labels.size()), model.targets.rows());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (static_cast<Eigen::Index>(labels[i]) >= model.targets.cols()) throw IndexError("label out of range");
        target.row(static_cast<Eigen::Index>(i)) = model.targets.col(static_cast<Eigen::Index>(labels[i])).transpose();
    }
    const Activations acts = forward_pass(model.net, batch);
    const LossResult ce = sigmoid_cross_entropy(acts.logits(), target);
    Penalties pen;
    pen.weight_l1 = model.config.weight_l1;
    pen.weight_layer = model.net.layers.size() - 1;
    BatchLoss out;
    out.value = ce.value + penalty_value(model.net, acts, pen);
    out.grads = backward_pass(model.net, acts, ce.grad, pen);
    return out;
}

LogisticProxyModel train_logistic(const FeatureDataset& data, const Matrix& g, const TrainConfig& config) {
    check_training_inputs(data, g);
    LogisticProxyModel model = init_logistic(static_cast<std::size_t>(data.features.cols()), g, config);
    run_sgd(model, data, logistic_loss, [](const Gradients&, std::size_t) {});
    return model;
}

Matrix predict_attributes(const DeepProxyModel& model, const Matrix& features) {
    check_features(model.net, features);
    const Activations acts = forward_pass(model.net, features);
    return acts.outputs[model.net.layers.size()];
}

Matrix predict_attributes(const LogisticProxyModel& model, const Matrix& features) {
    check_features(model.net, features);
    return forward_pass(model.net, features).output();
}

Matrix predict_styles(const DeepProxyModel& model, const Matrix& features) {
    check_features(model.net, features);
    return forward_pass(model.net, features).output();
}

void write_deep_proxy(std::ostream& out, const DeepProxyModel& model) {
    Checkpoint ckpt;
    ckpt.model = model.net;
    ckpt.terminal_state.variant = static_cast<std::uint32_t>(model.gstar.variant());
    ckpt.terminal_state.source = model.gstar.source();
    ckpt.terminal_state.pre_shift = model.gstar.pre_shift();
    ckpt.terminal_state.offset = model.gstar.offset();
    write_checkpoint(out, ckpt);
}

DeepProxyModel read_deep_proxy(std::istream& in) {
    Checkpoint ckpt = read_checkpoint(in);
    if (!ckpt.model.terminal || ckpt.model.layers.empty())
        throw FormatError("checkpoint does not hold a deep-proxy network");
    if (ckpt.terminal_state.variant > static_cast<std::uint32_t>(GStarVariant::offset))
        throw FormatError("checkpoint has an unknown G* variant");
    const auto variant = static_cast<GStarVariant>(ckpt.terminal_state.variant);
    Matrix source = ckpt.terminal_state.source.size() ? ckpt.terminal_state.source : ckpt.model.terminal->map;
    DeepProxyModel model;
    model.gstar = GStar::restore(variant, ckpt.model.terminal->map, std::move(source), ckpt.terminal_state.pre_shift,
                                 ckpt.terminal_state.offset);
    model.net = std::move(ckpt.model);
    model.config.hidden.clear();
    for (std::size_t i = 0; i + 1 < model.net.layers.size(); ++i)
        model.config.hidden.push_back(static_cast<std::size_t>(model.net.layers[i].outputs()));
    return model;
}

void write_style_classifier(std::ostream& out, const StyleClassifier& model) {
    Checkpoint ckpt;
    ckpt.model = model.net;
    write_checkpoint(out, ckpt);
}

StyleClassifier read_style_classifier(std::istream& in) {
    Checkpoint ckpt = read_checkpoint(in);
    if (ckpt.model.terminal || ckpt.model.layers.empty() || ckpt.model.layers.back().activation != Activation::softmax)
        throw FormatError("checkpoint does not hold a style classifier");
    StyleClassifier model;
    model.net = std::move(ckpt.model);
    model.config.hidden.clear();
    for (std::size_t i = 0; i + 1 < model.net.layers.size(); ++i)
        model.config.hidden.push_back(static_cast<std::size_t>(model.net.layers[i].outputs()));
    return model;
}

void write_logistic(std::ostream& out, const LogisticProxyModel& model) {
    Checkpoint ckpt;
    ckpt.model = model.net;
    // Targets travel as a plain (never applied) terminal map.
    ckpt.model.terminal = FixedTerminal{model.targets, Activation::linear};
    ckpt.terminal_state.variant = 0xffffffffu;
    write_checkpoint(out, ckpt);
}

LogisticProxyModel read_logistic(std::istream& in) {
    Checkpoint ckpt = read_checkpoint(in);
    if (!ckpt.model.terminal || ckpt.model.layers.empty() || ckpt.terminal_state.variant != 0xffffffffu ||
        ckpt.model.layers.back().activation != Activation::sigmoid)
        throw FormatError("checkpoint does not hold a logistic network");
    LogisticProxyModel model;
    model.targets = ckpt.model.terminal->map;
    ckpt.model.terminal.reset();
    model.net = std::move(ckpt.model);
    model.config.hidden.clear();
    for (std::size_t i = 0; i + 1 < model.net.layers.size(); ++i)
        model.config.hidden.push_back(static_cast<std::size_t>(model.net.layers[i].outputs()));
    return model;
}

}  // namespace pxy
