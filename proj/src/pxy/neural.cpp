#include "pxy/neural.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <string>

#include "pxy/binary_io.hpp"
#include "pxy/errors.hpp"

namespace pxy {

namespace {

Matrix sign_matrix(const Matrix& m) {
    return m.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// d(output)/d(pre) applied elementwise to `grad_out`.
Matrix through_activation(Activation act, const Matrix& pre, const Matrix& out, const Matrix& grad_out) {
    switch (act) {
        case Activation::linear: return grad_out;
        case Activation::relu: return grad_out.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
        case Activation::sigmoid: return grad_out.cwiseProduct(out.cwiseProduct((1.0 - out.array()).matrix()));
        case Activation::softmax: {
            // J^t g = y .* (g - <g, y>) per row
            const Vector dot = grad_out.cwiseProduct(out).rowwise().sum();
            return out.cwiseProduct((grad_out.colwise() - dot));
        }
    }
    return grad_out;
}

bool valid_activation(std::uint32_t code) { return code <= static_cast<std::uint32_t>(Activation::softmax); }

}  // namespace

Eigen::Index MlpModel::input_dim() const {
    if (!layers.empty()) return layers.front().inputs();
    return terminal ? terminal->map.rows() : 0;
}

Eigen::Index MlpModel::output_dim() const {
    if (terminal) return terminal->map.cols();
    return layers.empty() ? 0 : layers.back().outputs();
}

void MlpModel::validate() const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].bias.size() != layers[i].outputs()) throw ShapeError("layer " + std::to_string(i) + ": bias size");
        if (i > 0 && layers[i].inputs() != layers[i - 1].outputs())
            throw ShapeError("layer " + std::to_string(i) + " expects " + std::to_string(layers[i].inputs()) +
                             " inputs, previous layer produces " + std::to_string(layers[i - 1].outputs()));
    }
    if (terminal && !layers.empty() && terminal->map.rows() != layers.back().outputs())
        throw ShapeError("terminal map does not match the last dense layer");
}

MlpModel make_mlp(std::size_t input_dim, const std::vector<LayerSpec>& specs, std::mt19937_64& rng) {
    MlpModel model;
    std::size_t fan_in = input_dim;
    for (const auto& spec : specs) {
        if (spec.width == 0 || fan_in == 0) throw InvalidConfig("layer widths must be positive");
        const double limit = spec.activation == Activation::relu
                                 ? std::sqrt(6.0 / static_cast<double>(fan_in))
                                 : std::sqrt(6.0 / static_cast<double>(fan_in + spec.width));
        std::uniform_real_distribution<double> dist(-limit, limit);
        DenseLayer layer;
        layer.weight.resize(static_cast<Eigen::Index>(spec.width), static_cast<Eigen::Index>(fan_in));
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) layer.weight(i, j) = dist(rng);
        layer.bias = Vector::Zero(static_cast<Eigen::Index>(spec.width));
        layer.activation = spec.activation;
        model.layers.push_back(std::move(layer));
        fan_in = spec.width;
    }
    return model;
}

void TrainConfig::validate() const {
    if (batch < 1) throw InvalidConfig("batch size must be at least 1");
    if (!(learning_rate > 0.0)) throw InvalidConfig("learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidConfig("momentum must lie in [0, 1)");
    if (!(decay > 0.0 && decay <= 1.0)) throw InvalidConfig("decay factor must lie in (0, 1]");
    if (decay_epochs < 1) throw InvalidConfig("decay interval must be at least one epoch");
    if (!(activation_l1 >= 0.0) || !(weight_l1 >= 0.0)) throw InvalidConfig("L1 weights must be nonnegative");
    for (const auto h : hidden)
        if (h == 0) throw InvalidConfig("hidden widths must be positive");
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out = logits.colwise() - logits.rowwise().maxCoeff();
    out = out.array().exp();
    const Vector sums = out.rowwise().sum();
    return sums.cwiseInverse().asDiagonal() * out;
}

Matrix apply_activation(Activation act, const Matrix& pre) {
    switch (act) {
        case Activation::linear: return pre;
        case Activation::relu: return pre.cwiseMax(0.0);
        case Activation::sigmoid: return pre.unaryExpr([](double z) { return sigmoid(z); });
        case Activation::softmax: return softmax_rows(pre);
    }
    return pre;
}

Activations forward_pass(const MlpModel& model, const Matrix& batch) {
    if (batch.cols() != model.input_dim())
        throw ShapeError("forward pass: batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                         std::to_string(model.input_dim()));
    Activations acts;
    acts.outputs.reserve(model.stage_count() + 1);
    acts.pre.reserve(model.stage_count());
    acts.outputs.push_back(batch);
    for (const auto& layer : model.layers) {
        Matrix z = acts.outputs.back() * layer.weight.transpose();
        z.rowwise() += layer.bias.transpose();
        acts.outputs.push_back(apply_activation(layer.activation, z));
        acts.pre.push_back(std::move(z));
    }
    if (model.terminal) {
        Matrix z = acts.outputs.back() * model.terminal->map;
        acts.outputs.push_back(apply_activation(model.terminal->activation, z));
        acts.pre.push_back(std::move(z));
    }
    return acts;
}

double penalty_value(const MlpModel& model, const Activations& acts, const Penalties& penalties) {
    double total = 0.0;
    if (penalties.activation_l1 > 0.0) {
        const Matrix& a = acts.outputs.at(penalties.activation_stage + 1);
        total += penalties.activation_l1 * a.cwiseAbs().sum() / static_cast<double>(a.rows());
    }
    if (penalties.weight_l1 > 0.0) total += penalties.weight_l1 * model.layers.at(penalties.weight_layer).weight.cwiseAbs().sum();
    return total;
}

Gradients backward_pass(const MlpModel& model, const Activations& acts, const Matrix& loss_grad,
                        const Penalties& penalties) {
    const std::size_t stages = model.stage_count();
    if (acts.outputs.size() != stages + 1 || acts.pre.size() != stages)
        throw ShapeError("backward pass: activations do not belong to this model");
    for (std::size_t i = 0; i < model.layers.size(); ++i)
        if (acts.pre[i].cols() != model.layers[i].outputs() || acts.outputs[i].cols() != model.layers[i].inputs())
            throw ShapeError("backward pass: stale activations for layer " + std::to_string(i));
    if (loss_grad.rows() != acts.pre.back().rows() || loss_grad.cols() != acts.pre.back().cols())
        throw ShapeError("backward pass: loss gradient shape does not match the output");

    const auto b = static_cast<double>(loss_grad.rows());
    const bool act_l1 = penalties.activation_l1 > 0.0;

    auto activation_of = [&](std::size_t stage) {
        return stage < model.layers.size() ? model.layers[stage].activation : model.terminal->activation;
    };
    auto l1_grad = [&](std::size_t stage) -> Matrix {
        return (penalties.activation_l1 / b) * sign_matrix(acts.outputs[stage + 1]);
    };

    Gradients g;
    g.weight.resize(model.layers.size());
    g.bias.resize(model.layers.size());

    // delta: gradient with respect to the pre-activation of the current stage.
    Matrix delta = loss_grad;
    std::size_t stage = stages - 1;
    if (act_l1 && penalties.activation_stage == stage)
        delta += through_activation(activation_of(stage), acts.pre[stage], acts.outputs[stage + 1], l1_grad(stage));

    if (model.terminal) {
        g.terminal = acts.outputs[stage].transpose() * delta;
        Matrix up = delta * model.terminal->map.transpose();
        if (model.layers.empty()) return g;
        --stage;
        if (act_l1 && penalties.activation_stage == stage) up += l1_grad(stage);
        delta = through_activation(activation_of(stage), acts.pre[stage], acts.outputs[stage + 1], up);
    }

    for (std::size_t i = model.layers.size(); i-- > 0;) {
        g.weight[i] = delta.transpose() * acts.outputs[i];
        g.bias[i] = delta.colwise().sum().transpose();
        if (penalties.weight_l1 > 0.0 && penalties.weight_layer == i)
            g.weight[i] += penalties.weight_l1 * sign_matrix(model.layers[i].weight);
        if (i == 0) break;
        Matrix up = delta * model.layers[i].weight;
        if (act_l1 && penalties.activation_stage == i - 1) up += l1_grad(i - 1);
        delta = through_activation(model.layers[i - 1].activation, acts.pre[i - 1], acts.outputs[i], up);
    }
    return g;
}

LossResult softmax_cross_entropy(const Matrix& logits, const std::vector<std::size_t>& labels) {
    if (static_cast<std::size_t>(logits.rows()) != labels.size())
        throw ShapeError("cross-entropy: label count does not match batch");
    const auto b = static_cast<double>(logits.rows());
    LossResult r;
    const Vector mx = logits.rowwise().maxCoeff();
    const Matrix shifted = logits.colwise() - mx;
    const Vector lse = shifted.array().exp().rowwise().sum().log().matrix();
    r.grad = softmax_rows(logits);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const auto col = static_cast<Eigen::Index>(labels[i]);
        if (col >= logits.cols()) throw IndexError("cross-entropy: label out of range");
        r.value += lse(row) - shifted(row, col);
        r.grad(row, col) -= 1.0;
    }
    r.value /= b;
    r.grad /= b;
    return r;
}

LossResult sigmoid_cross_entropy(const Matrix& logits, const Matrix& targets) {
    if (logits.rows() != targets.rows() || logits.cols() != targets.cols())
        throw ShapeError("sigmoid cross-entropy: target shape does not match output");
    const auto b = static_cast<double>(logits.rows());
    LossResult r;
    // max(z,0) - z t + log(1 + exp(-|z|))
    r.value = (logits.cwiseMax(0.0) - logits.cwiseProduct(targets)).sum() +
              logits.unaryExpr([](double z) { return std::log1p(std::exp(-std::abs(z))); }).sum();
    r.value /= b;
    r.grad = (apply_activation(Activation::sigmoid, logits) - targets) / b;
    return r;
}

LossResult squared_error(const Matrix& output, const Matrix& target) {
    if (output.rows() != target.rows() || output.cols() != target.cols())
        throw ShapeError("squared error: target shape does not match output");
    const auto b = static_cast<double>(output.rows());
    LossResult r;
    const Matrix diff = output - target;
    r.value = diff.squaredNorm() / b;
    r.grad = 2.0 * diff / b;
    return r;
}

Velocity Velocity::zeros_like(const MlpModel& model) {
    Velocity v;
    for (const auto& l : model.layers) {
        v.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
        v.bias.push_back(Vector::Zero(l.bias.size()));
    }
    return v;
}

double learning_rate(const TrainConfig& config, std::size_t step, std::size_t dataset_size) {
    if (dataset_size == 0) throw DataError("empty training set");
    const std::uint64_t epoch = static_cast<std::uint64_t>(step) * config.batch / dataset_size;
    return config.learning_rate * std::pow(config.decay, static_cast<double>(epoch / config.decay_epochs));
}

void sgd_momentum_step(MlpModel& model, const Gradients& grads, Velocity& velocity, const TrainConfig& config,
                       std::size_t step, std::size_t dataset_size) {
    if (velocity.weight.size() != model.layers.size() || grads.weight.size() != model.layers.size())
        throw ShapeError("optimizer state does not match the model");
    const double lr = learning_rate(config, step, dataset_size);
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        velocity.weight[i] = config.momentum * velocity.weight[i] - lr * grads.weight[i];
        velocity.bias[i] = config.momentum * velocity.bias[i] - lr * grads.bias[i];
        model.layers[i].weight += velocity.weight[i];
        model.layers[i].bias += velocity.bias[i];
    }
}

BatchSampler::BatchSampler(std::size_t dataset_size, std::uint64_t seed) : order_(dataset_size), rng_(seed) {
    if (dataset_size == 0) throw DataError("cannot sample batches from an empty dataset");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
}

std::vector<std::size_t> BatchSampler::next(std::size_t batch) {
    if (pos_ >= order_.size()) {
        std::shuffle(order_.begin(), order_.end(), rng_);
        pos_ = 0;
    }
    const std::size_t end = std::min(order_.size(), pos_ + batch);
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(end));
    pos_ = end;
    return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

// ---------------------------------------------------------------------------

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    const MlpModel& model = ckpt.model;
    model.validate();
    const TerminalState& ts = ckpt.terminal_state;

    detail::ByteWriter w;
    w.raw("PXYM");
    w.u32(static_cast<std::uint32_t>(model.layers.size()));
    for (const auto& l : model.layers) {
        w.u32(static_cast<std::uint32_t>(l.inputs()));
        w.u32(static_cast<std::uint32_t>(l.outputs()));
        w.u32(static_cast<std::uint32_t>(l.activation));
    }
    w.u32(model.terminal ? 1 : 0);
    const bool has_source = model.terminal && ts.source.size() > 0;
    if (model.terminal) {
        w.u32(static_cast<std::uint32_t>(model.terminal->map.rows()));
        w.u32(static_cast<std::uint32_t>(model.terminal->map.cols()));
        w.u32(static_cast<std::uint32_t>(model.terminal->activation));
        w.u32(ts.variant);
        w.f32(ts.pre_shift);
        w.u32(has_source ? 1 : 0);
        w.u32(static_cast<std::uint32_t>(ts.offset.size()));
    }
    for (const auto& l : model.layers) {
        w.matrix_f32(l.weight);
        w.matrix_f32(l.bias.transpose());
    }
    if (model.terminal) {
        w.matrix_f32(model.terminal->map);
        if (has_source) {
            if (ts.source.rows() != model.terminal->map.rows() || ts.source.cols() != model.terminal->map.cols())
                throw ShapeError("terminal source must have the terminal map's shape");
            w.matrix_f32(ts.source);
        }
        w.matrix_f32(ts.offset.transpose());
    }
    w.seal();
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
}

Checkpoint read_checkpoint(std::istream& in) {
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    detail::ByteReader r(bytes, "PXYM checkpoint");
    r.expect("PXYM");
    r.verify_seal();

    Checkpoint ckpt;
    MlpModel& model = ckpt.model;
    const std::uint32_t count = r.u32();
    if (count > 4096) r.fail("implausible layer count");
    std::vector<std::array<std::uint32_t, 3>> dims(count);
    for (auto& d : dims) {
        d = {r.u32(), r.u32(), r.u32()};
        if (!valid_activation(d[2])) r.fail("unknown activation code");
    }
    const std::uint32_t has_terminal = r.u32();
    if (has_terminal > 1) r.fail("bad terminal flag");
    std::uint32_t t_in = 0, t_out = 0, t_act = 0, has_source = 0, offset_len = 0;
    if (has_terminal) {
        t_in = r.u32();
        t_out = r.u32();
        t_act = r.u32();
        if (!valid_activation(t_act)) r.fail("unknown activation code");
        ckpt.terminal_state.variant = r.u32();
        ckpt.terminal_state.pre_shift = r.f32();
        has_source = r.u32();
        if (has_source > 1) r.fail("bad source flag");
        offset_len = r.u32();
    }
    for (const auto& d : dims) {
        DenseLayer l;
        l.weight = r.matrix_f32(d[1], d[0]);
        l.bias = r.matrix_f32(1, d[1]).transpose();
        l.activation = static_cast<Activation>(d[2]);
        model.layers.push_back(std::move(l));
    }
    if (has_terminal) {
        FixedTerminal t;
        t.map = r.matrix_f32(t_in, t_out);
        t.activation = static_cast<Activation>(t_act);
        model.terminal = std::move(t);
        if (has_source) ckpt.terminal_state.source = r.matrix_f32(t_in, t_out);
        ckpt.terminal_state.offset = r.matrix_f32(1, offset_len).transpose();
    }
    r.finish();
    try {
        model.validate();
    } catch (const ShapeError& e) {
        r.fail(e.what());
    }
    return ckpt;
}

}  // namespace pxy
