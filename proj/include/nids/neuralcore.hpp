#pragma once

// Dense multilayer perceptron: forward/backward passes, activations, losses,
// Gaussian input noise, inverted dropout, Adam and an early-stopping trainer.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nids/matrix.hpp"

namespace nids {

using Rng = std::mt19937_64;

enum class Activation { Relu, Selu, Softmax, Identity };
enum class LossKind { Mse, CrossEntropy };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

std::vector<double> activate(Activation kind, std::span<const double> x);

struct LossValue {
    double value = 0.0;
    std::vector<double> grad;  // d loss / d prediction
};

// mse: mean of squared differences. cross_entropy: -sum t*log(max(p, 1e-12)).
LossValue loss(LossKind kind, std::span<const double> prediction, std::span<const double> target);

struct BatchLoss {
    double value = 0.0;  // mean of per-row losses
    Matrix grad;         // d value / d prediction (includes the 1/rows factor)
};

BatchLoss batch_loss(LossKind kind, const Matrix& prediction, const Matrix& target);

struct LayerSpec {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::Identity;
    double dropout_rate = 0.0;  // applied to the layer input, training only
    double noise_sigma = 0.0;   // additive Gaussian noise on the layer input, training only

    bool operator==(const LayerSpec&) const = default;
};

struct DenseLayer {
    LayerSpec spec;
    Matrix weights;  // out_dim x in_dim
    std::vector<double> bias;

    bool operator==(const DenseLayer&) const = default;
};

enum class Mode { Train, Infer };

class MlpModel {
public:
    static inline constexpr int kFormatVersion = 1;

    MlpModel() = default;
    // He-uniform for ReLU, LeCun-normal for SeLU, Glorot-uniform otherwise.
    static MlpModel create(std::vector<LayerSpec> specs, std::uint64_t seed);
    // Layers with given parameters; dimensions are validated.
    static MlpModel from_layers(std::vector<DenseLayer> layers);

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::size_t parameter_count() const;

    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& mutable_layers() {
        ++revision_;
        return layers_;
    }

    Mode mode() const { return mode_; }
    void set_mode(Mode m) { mode_ = m; }

    // Incremented whenever parameters may have changed.
    std::uint64_t revision() const { return revision_; }

    // Parameter blocks in a fixed order: W0, b0, W1, b1, ...
    std::vector<std::span<double>> parameter_blocks();

    // Deterministic inference pass regardless of mode.
    Matrix predict(const Matrix& batch) const;

    nlohmann::json to_json() const;
    static MlpModel from_json(const nlohmann::json& j);

    bool same_parameters(const MlpModel& other) const { return layers_ == other.layers_; }

private:
    std::vector<DenseLayer> layers_;
    Mode mode_ = Mode::Infer;
    std::uint64_t revision_ = 0;
};

struct LayerCache {
    Matrix input;  // after noise and dropout
    Matrix pre;    // W x + b
    Matrix out;    // activation(pre)
    // Per-element dropout factor (0 or 1/(1-p)); empty when dropout was off.
    Matrix dropout_scale;
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    std::uint64_t model_revision = 0;
    const Matrix& output() const { return layers.back().out; }
};

// In Train mode, noise and dropout are drawn from rng (required). In Infer
// mode the pass is deterministic and rng is ignored.
ForwardCache forward(const MlpModel& model, const Matrix& batch, Rng* rng);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> bias;

    // Same block order as MlpModel::parameter_blocks.
    std::vector<std::span<const double>> blocks() const;
};

// output_grad is d loss / d network output.
Gradients backward(const MlpModel& model, const ForwardCache& cache, const Matrix& output_grad);
// Starts from d loss / d (last layer pre-activation); used for fused softmax + cross-entropy.
Gradients backward_from_preactivation(const MlpModel& model, const ForwardCache& cache, const Matrix& pre_grad);

struct AdamState {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

// Bias-corrected Adam update of each parameter block. Accumulators are sized
// on first use; later calls must present the same shapes.
void adam_step(AdamState& state, const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads);

struct TrainConfig {
    std::size_t batch_size = 32;
    double val_fraction = 0.15;
    std::size_t patience = 6;
    std::size_t max_epochs = 200;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::Mse;
    double learning_rate = 0.001;

    void validate() const;
};

// Tracks validation loss; stop() once `patience` consecutive epochs fail to
// improve on the best loss seen.
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

    // Returns true if this loss is a new best.
    bool observe(double val_loss);
    bool stop() const { return stagnant_ >= patience_; }
    std::size_t best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_; }
    std::size_t stagnant_epochs() const { return stagnant_; }

private:
    std::size_t patience_;
    std::size_t epochs_ = 0;
    std::size_t stagnant_ = 0;
    std::size_t best_epoch_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

struct TrainHistory {
    double initial_train_loss = 0.0;  // before the first update, infer mode
    double initial_val_loss = 0.0;
    std::vector<double> train_loss;  // per epoch, mean of mini-batch losses
    std::vector<double> val_loss;
    std::size_t best_epoch = 0;  // 1-based; 0 means no epoch improved
    bool early_stopped = false;

    nlohmann::json to_json() const;
};

struct TrainResult {
    MlpModel model;  // parameters from the best validation epoch, infer mode
    TrainHistory history;
};

double evaluate_loss(const MlpModel& model, const Matrix& inputs, const Matrix& targets, LossKind kind);

// Holds out cfg.val_fraction of the rows (seeded shuffle) for validation.
TrainResult train(MlpModel model, const Matrix& inputs, const Matrix& targets, const TrainConfig& cfg);
TrainResult train(MlpModel model, const Matrix& inputs, const Matrix& targets, const Matrix& val_inputs,
                  const Matrix& val_targets, const TrainConfig& cfg);

// Seeded permutation split into (train indices, validation indices).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double val_fraction,
                                                                            std::uint64_t seed);

Matrix one_hot(const std::vector<int>& labels, std::size_t classes);

}  // namespace nids
