#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "pxy/linalg.hpp"

namespace pxy {

enum class Activation : std::uint32_t { linear = 0, relu = 1, sigmoid = 2, softmax = 3 };

struct DenseLayer {
    Matrix weight;  // out x in
    Vector bias;    // out
    Activation activation = Activation::linear;

    Eigen::Index inputs() const { return weight.cols(); }
    Eigen::Index outputs() const { return weight.rows(); }
};

/// Non-trainable linear map appended after the dense stack (no bias).
struct FixedTerminal {
    Matrix map;  // in x out; outputs = inputs * map
    Activation activation = Activation::softmax;
};

struct MlpModel {
    std::vector<DenseLayer> layers;
    std::optional<FixedTerminal> terminal;

    Eigen::Index input_dim() const;
    Eigen::Index output_dim() const;
    /// Dense layers plus the terminal map, if any.
    std::size_t stage_count() const { return layers.size() + (terminal ? 1 : 0); }
    /// Throws ShapeError when consecutive dimensions disagree.
    void validate() const;
};

struct LayerSpec {
    std::size_t width;
    Activation activation;
};

/// Uniform fan-in (He) initialisation for ReLU layers, fan-average (Glorot) otherwise; zero biases.
MlpModel make_mlp(std::size_t input_dim, const std::vector<LayerSpec>& layers, std::mt19937_64& rng);

struct TrainConfig {
    std::size_t batch = 32;
    std::size_t steps = 200000;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    double decay = 0.94;
    std::size_t decay_epochs = 2;
    double activation_l1 = 0.0;  // lambda on the attribute layer
    double weight_l1 = 0.0;      // lambda_L on the attribute layer's weights
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden = {2048, 2048, 1024};

    void validate() const;
};

/// Per-stage values of one forward pass. `outputs[0]` is the input batch and
/// `outputs[i + 1]` the post-activation output of stage i.
struct Activations {
    std::vector<Matrix> outputs;
    std::vector<Matrix> pre;

    const Matrix& output() const { return outputs.back(); }
    const Matrix& logits() const { return pre.back(); }
};

Activations forward_pass(const MlpModel& model, const Matrix& batch);

Matrix apply_activation(Activation act, const Matrix& pre);

struct Penalties {
    double activation_l1 = 0.0;
    std::size_t activation_stage = 0;  // L1 on the mean (over the batch) of |output of this stage|
    double weight_l1 = 0.0;
    std::size_t weight_layer = 0;  // L1 on this dense layer's weight matrix
};

double penalty_value(const MlpModel& model, const Activations& acts, const Penalties& penalties);

struct Gradients {
    std::vector<Matrix> weight;
    std::vector<Vector> bias;
    /// Gradient with respect to the fixed terminal map (reported, never applied).
    std::optional<Matrix> terminal;
};

/// Exact gradients given `loss_grad`, the gradient of the data loss with respect
/// to the final stage's pre-activation. L1 subgradients use sign(x) with
/// sign(0) = 0.
Gradients backward_pass(const MlpModel& model, const Activations& acts, const Matrix& loss_grad,
                        const Penalties& penalties = {});

struct LossResult {
    double value = 0.0;
    Matrix grad;  // with respect to the logits
};

/// Mean over the batch of -log softmax(logits)[label].
LossResult softmax_cross_entropy(const Matrix& logits, const std::vector<std::size_t>& labels);
/// Mean over the batch of the summed binary cross-entropy of sigmoid(logits) against targets in [0, 1].
LossResult sigmoid_cross_entropy(const Matrix& logits, const Matrix& targets);
/// Mean over the batch of the summed squared error.
LossResult squared_error(const Matrix& output, const Matrix& target);

Matrix softmax_rows(const Matrix& logits);

struct Velocity {
    std::vector<Matrix> weight;
    std::vector<Vector> bias;

    static Velocity zeros_like(const MlpModel& model);
};

/// lr0 * decay^floor(epoch / decay_epochs) with epoch = floor(step * batch / dataset_size).
double learning_rate(const TrainConfig& config, std::size_t step, std::size_t dataset_size);

/// v <- momentum * v - lr(step) * grad; w <- w + v. The terminal map is untouched.
void sgd_momentum_step(MlpModel& model, const Gradients& grads, Velocity& velocity, const TrainConfig& config,
                       std::size_t step, std::size_t dataset_size);

/// Shuffles sample indices once per epoch and hands them out in batches; the
/// last batch of an epoch may be short.
class BatchSampler {
public:
    BatchSampler(std::size_t dataset_size, std::uint64_t seed);
    std::vector<std::size_t> next(std::size_t batch);

private:
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
    std::mt19937_64 rng_;
};

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows);

// ---------------------------------------------------------------------------
// PXYM checkpoint

/// Terminal-map metadata persisted with a checkpoint. `variant` is an opaque tag
/// for the writer; `source`, `pre_shift` and `offset` are optional extras.
struct TerminalState {
    std::uint32_t variant = 0;
    Matrix source;
    double pre_shift = 0.0;
    Vector offset;
};

struct Checkpoint {
    MlpModel model;
    TerminalState terminal_state;
};

/// Little-endian: "PXYM", u32 layer count, per layer u32 in/out/activation,
/// u32 terminal flag (+ u32 in/out/activation/variant, f32 pre-shift,
/// u32 source flag, u32 offset length), float32 parameters, then a CRC-32 of
/// all preceding bytes.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

}  // namespace pxy
