#include "nids/neuralcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nids/error.hpp"

namespace nids {

namespace {

constexpr double kLogClamp = 1e-12;

void check_finite(std::span<const double> x, const char* what) {
    for (double v : x) {
        if (!std::isfinite(v)) throw std::domain_error(std::string(what) + ": non-finite input");
    }
}

double derivative(Activation kind, double pre, double out) {
    switch (kind) {
        case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Selu: return pre > 0.0 ? kSeluLambda : out + kSeluLambda * kSeluAlpha;
        case Activation::Identity: return 1.0;
        case Activation::Softmax: break;
    }
    throw std::logic_error("derivative: softmax has no elementwise derivative");
}

void activate_row(Activation kind, std::span<const double> pre, std::span<double> out) {
    switch (kind) {
        case Activation::Relu:
            for (std::size_t i = 0; i < pre.size(); ++i) out[i] = pre[i] > 0.0 ? pre[i] : 0.0;
            return;
        case Activation::Selu:
            for (std::size_t i = 0; i < pre.size(); ++i)
                out[i] = pre[i] > 0.0 ? kSeluLambda * pre[i] : kSeluLambda * kSeluAlpha * std::expm1(pre[i]);
            return;
        case Activation::Identity:
            std::copy(pre.begin(), pre.end(), out.begin());
            return;
        case Activation::Softmax: {
            const double peak = *std::max_element(pre.begin(), pre.end());
            double sum = 0.0;
            for (std::size_t i = 0; i < pre.size(); ++i) {
                out[i] = std::exp(pre[i] - peak);
                sum += out[i];
            }
            for (auto& v : out) v /= sum;
            return;
        }
    }
}

void validate_layers(const std::vector<DenseLayer>& layers) {
    if (layers.empty()) throw ConfigError("model needs at least one layer");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& s = layers[l].spec;
        if (s.in_dim == 0 || s.out_dim == 0) throw ConfigError("layer dimensions must be >= 1");
        if (!(s.dropout_rate >= 0.0 && s.dropout_rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
        if (!(s.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
        if (layers[l].weights.rows() != s.out_dim || layers[l].weights.cols() != s.in_dim)
            throw ConfigError("layer " + std::to_string(l) + " weight shape does not match its spec");
        if (layers[l].bias.size() != s.out_dim) throw ConfigError("layer " + std::to_string(l) + " bias size mismatch");
        if (l > 0 && layers[l - 1].spec.out_dim != s.in_dim)
            throw ConfigError("layer " + std::to_string(l) + " input does not chain with previous output");
    }
}

// out = in * W^T + b
void affine(const Matrix& in, const DenseLayer& layer, Matrix& out) {
    const auto& w = layer.weights;
    out = Matrix(in.rows(), w.rows());
    for (std::size_t r = 0; r < in.rows(); ++r) {
        const auto x = in.row(r);
        auto o = out.row(r);
        for (std::size_t j = 0; j < w.rows(); ++j) {
            const auto wj = w.row(j);
            double s = layer.bias[j];
            for (std::size_t i = 0; i < x.size(); ++i) s += wj[i] * x[i];
            o[j] = s;
        }
    }
}

}  // namespace

std::string_view activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Selu: return "selu";
        case Activation::Softmax: return "softmax";
        case Activation::Identity: return "identity";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    for (auto a : {Activation::Relu, Activation::Selu, Activation::Softmax, Activation::Identity}) {
        if (activation_name(a) == name) return a;
    }
    throw FormatError("unknown activation '" + std::string(name) + "'");
}

std::vector<double> activate(Activation kind, std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("activate: empty input");
    check_finite(x, "activate");
    std::vector<double> out(x.size());
    activate_row(kind, x, out);
    return out;
}

LossValue loss(LossKind kind, std::span<const double> prediction, std::span<const double> target) {
    if (prediction.size() != target.size() || prediction.empty())
        throw std::invalid_argument("loss: prediction/target length mismatch");
    LossValue lv;
    lv.grad.resize(prediction.size());
    if (kind == LossKind::Mse) {
        const auto n = static_cast<double>(prediction.size());
        for (std::size_t i = 0; i < prediction.size(); ++i) {
            const double d = prediction[i] - target[i];
            lv.value += d * d;
            lv.grad[i] = 2.0 * d / n;
        }
        lv.value /= n;
    } else {
        for (std::size_t i = 0; i < prediction.size(); ++i) {
            const double p = std::max(prediction[i], kLogClamp);
            lv.value -= target[i] * std::log(p);
            lv.grad[i] = prediction[i] > kLogClamp ? -target[i] / p : 0.0;
        }
    }
    return lv;
}

BatchLoss batch_loss(LossKind kind, const Matrix& prediction, const Matrix& target) {
    if (prediction.rows() != target.rows() || prediction.cols() != target.cols() || prediction.rows() == 0)
        throw std::invalid_argument("batch_loss: shape mismatch");
    BatchLoss bl;
    bl.grad = Matrix(prediction.rows(), prediction.cols());
    const auto rows = static_cast<double>(prediction.rows());
    for (std::size_t r = 0; r < prediction.rows(); ++r) {
        auto lv = loss(kind, prediction.row(r), target.row(r));
        bl.value += lv.value;
        auto g = bl.grad.row(r);
        for (std::size_t c = 0; c < g.size(); ++c) g[c] = lv.grad[c] / rows;
    }
    bl.value /= rows;
    return bl;
}

// ---------------------------------------------------------------------------
// Model

MlpModel MlpModel::create(std::vector<LayerSpec> specs, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<DenseLayer> layers;
    for (const auto& s : specs) {
        DenseLayer layer{s, Matrix(s.out_dim, s.in_dim), std::vector<double>(s.out_dim, 0.0)};
        const auto fan_in = static_cast<double>(s.in_dim);
        const auto fan_out = static_cast<double>(s.out_dim);
        auto& w = layer.weights.data();
        if (s.activation == Activation::Selu) {
            std::normal_distribution<double> dist(0.0, std::sqrt(1.0 / fan_in));
            for (auto& v : w) v = dist(rng);
        } else {
            const double limit =
                s.activation == Activation::Relu ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out));
            std::uniform_real_distribution<double> dist(-limit, limit);
            for (auto& v : w) v = dist(rng);
        }
        layers.push_back(std::move(layer));
    }
    return from_layers(std::move(layers));
}

MlpModel MlpModel::from_layers(std::vector<DenseLayer> layers) {
    validate_layers(layers);
    MlpModel m;
    m.layers_ = std::move(layers);
    return m;
}

std::size_t MlpModel::input_dim() const { return layers_.empty() ? 0 : layers_.front().spec.in_dim; }
std::size_t MlpModel::output_dim() const { return layers_.empty() ? 0 : layers_.back().spec.out_dim; }

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.data().size() + l.bias.size();
    return n;
}

std::vector<std::span<double>> MlpModel::parameter_blocks() {
    ++revision_;
    std::vector<std::span<double>> blocks;
    for (auto& l : layers_) {
        blocks.emplace_back(l.weights.data());
        blocks.emplace_back(l.bias);
    }
    return blocks;
}

Matrix MlpModel::predict(const Matrix& batch) const {
    if (batch.cols() != input_dim())
        throw DataError("predict: batch width " + std::to_string(batch.cols()) + " != model input " +
                        std::to_string(input_dim()));
    Matrix x = batch;
    for (const auto& layer : layers_) {
        Matrix pre;
        affine(x, layer, pre);
        x = Matrix(pre.rows(), pre.cols());
        for (std::size_t r = 0; r < pre.rows(); ++r) activate_row(layer.spec.activation, pre.row(r), x.row(r));
    }
    return x;
}

nlohmann::json MlpModel::to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : layers_) {
        layers.push_back({{"in_dim", l.spec.in_dim},
                          {"out_dim", l.spec.out_dim},
                          {"activation", activation_name(l.spec.activation)},
                          {"dropout_rate", l.spec.dropout_rate},
                          {"noise_sigma", l.spec.noise_sigma},
                          {"weights", l.weights.data()},
                          {"bias", l.bias}});
    }
    return {{"format_version", kFormatVersion}, {"kind", "mlp"}, {"layers", layers}};
}

MlpModel MlpModel::from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "mlp") throw FormatError("not an mlp model document");
    if (j.value("format_version", -1) != kFormatVersion)
        throw FormatError("mlp format_version mismatch (expected " + std::to_string(kFormatVersion) + ")");
    std::vector<DenseLayer> layers;
    for (const auto& jl : j.at("layers")) {
        DenseLayer l;
        l.spec.in_dim = jl.at("in_dim").get<std::size_t>();
        l.spec.out_dim = jl.at("out_dim").get<std::size_t>();
        l.spec.activation = parse_activation(jl.at("activation").get<std::string>());
        l.spec.dropout_rate = jl.at("dropout_rate").get<double>();
        l.spec.noise_sigma = jl.at("noise_sigma").get<double>();
        const auto w = jl.at("weights").get<std::vector<double>>();
        if (w.size() != l.spec.in_dim * l.spec.out_dim) throw FormatError("mlp weight array has wrong length");
        l.weights = Matrix(l.spec.out_dim, l.spec.in_dim);
        l.weights.data() = w;
        l.bias = jl.at("bias").get<std::vector<double>>();
        layers.push_back(std::move(l));
    }
    try {
        return from_layers(std::move(layers));
    } catch (const ConfigError& e) {
        throw FormatError(e.what());
    }
}

// ---------------------------------------------------------------------------
// Forward / backward

ForwardCache forward(const MlpModel& model, const Matrix& batch, Rng* rng) {
    if (batch.cols() != model.input_dim())
        throw DataError("forward: batch width " + std::to_string(batch.cols()) + " != model input " +
                        std::to_string(model.input_dim()));
    const bool training = model.mode() == Mode::Train;
    if (training && rng == nullptr) throw std::invalid_argument("forward: train mode needs an rng");

    ForwardCache cache;
    cache.model_revision = model.revision();
    cache.layers.reserve(model.layers().size());
    const Matrix* x = &batch;
    for (const auto& layer : model.layers()) {
        LayerCache lc;
        lc.input = *x;
        if (training && layer.spec.noise_sigma > 0.0) {
            std::normal_distribution<double> noise(0.0, layer.spec.noise_sigma);
            for (auto& v : lc.input.data()) v += noise(*rng);
        }
        if (training && layer.spec.dropout_rate > 0.0) {
            const double keep = 1.0 - layer.spec.dropout_rate;
            std::bernoulli_distribution kept(keep);
            lc.dropout_scale = Matrix(lc.input.rows(), lc.input.cols());
            auto& scale = lc.dropout_scale.data();
            auto& in = lc.input.data();
            for (std::size_t i = 0; i < in.size(); ++i) {
                scale[i] = kept(*rng) ? 1.0 / keep : 0.0;
                in[i] *= scale[i];
            }
        }
        affine(lc.input, layer, lc.pre);
        lc.out = Matrix(lc.pre.rows(), lc.pre.cols());
        for (std::size_t r = 0; r < lc.pre.rows(); ++r) activate_row(layer.spec.activation, lc.pre.row(r), lc.out.row(r));
        cache.layers.push_back(std::move(lc));
        x = &cache.layers.back().out;
    }
    return cache;
}

std::vector<std::span<const double>> Gradients::blocks() const {
    std::vector<std::span<const double>> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.emplace_back(weights[l].data());
        out.emplace_back(bias[l]);
    }
    return out;
}

namespace {

void check_cache(const MlpModel& model, const ForwardCache& cache) {
    if (cache.model_revision != model.revision() || cache.layers.size() != model.layers().size())
        throw std::logic_error("backward: forward cache is stale for this model");
}

Gradients backprop(const MlpModel& model, const ForwardCache& cache, Matrix delta, std::size_t last) {
    const auto& layers = model.layers();
    Gradients g;
    g.weights.resize(layers.size());
    g.bias.resize(layers.size());
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& layer = layers[l];
        const auto& lc = cache.layers[l];
        if (l != last) {
            // delta currently holds d/d(out); convert to d/d(pre).
            for (std::size_t r = 0; r < delta.rows(); ++r) {
                auto d = delta.row(r);
                const auto pre = lc.pre.row(r);
                const auto out = lc.out.row(r);
                if (layer.spec.activation == Activation::Softmax) {
                    double dot = 0.0;
                    for (std::size_t j = 0; j < d.size(); ++j) dot += d[j] * out[j];
                    for (std::size_t j = 0; j < d.size(); ++j) d[j] = out[j] * (d[j] - dot);
                } else {
                    for (std::size_t j = 0; j < d.size(); ++j) d[j] *= derivative(layer.spec.activation, pre[j], out[j]);
                }
            }
        }
        auto& gw = g.weights[l];
        auto& gb = g.bias[l];
        gw = Matrix(layer.spec.out_dim, layer.spec.in_dim);
        gb.assign(layer.spec.out_dim, 0.0);
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            const auto d = delta.row(r);
            const auto x = lc.input.row(r);
            for (std::size_t j = 0; j < d.size(); ++j) {
                if (d[j] == 0.0) continue;
                gb[j] += d[j];
                auto wj = gw.row(j);
                for (std::size_t i = 0; i < x.size(); ++i) wj[i] += d[j] * x[i];
            }
        }
        if (l == 0) break;
        Matrix prev(delta.rows(), layer.spec.in_dim);
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            const auto d = delta.row(r);
            auto p = prev.row(r);
            for (std::size_t j = 0; j < d.size(); ++j) {
                if (d[j] == 0.0) continue;
                const auto wj = layer.weights.row(j);
                for (std::size_t i = 0; i < p.size(); ++i) p[i] += d[j] * wj[i];
            }
        }
        if (!lc.dropout_scale.empty()) {
            auto& pd = prev.data();
            const auto& s = lc.dropout_scale.data();
            for (std::size_t i = 0; i < pd.size(); ++i) pd[i] *= s[i];
        }
        delta = std::move(prev);
        // Next iteration treats delta as d/d(out) of layer l-1.
        last = static_cast<std::size_t>(-1);
    }
    return g;
}

}  // namespace

Gradients backward(const MlpModel& model, const ForwardCache& cache, const Matrix& output_grad) {
    check_cache(model, cache);
    const auto& out = cache.output();
    if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols())
        throw std::invalid_argument("backward: gradient shape does not match network output");
    // Treat the output gradient as d/d(out) of the last layer.
    return backprop(model, cache, output_grad, static_cast<std::size_t>(-1));
}

Gradients backward_from_preactivation(const MlpModel& model, const ForwardCache& cache, const Matrix& pre_grad) {
    check_cache(model, cache);
    const auto& out = cache.output();
    if (pre_grad.rows() != out.rows() || pre_grad.cols() != out.cols())
        throw std::invalid_argument("backward: gradient shape does not match network output");
    return backprop(model, cache, pre_grad, model.layers().size() - 1);
}

// ---------------------------------------------------------------------------
// Adam

void adam_step(AdamState& state, const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads) {
    if (params.size() != grads.size()) throw std::invalid_argument("adam_step: block count mismatch");
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.size(), 0.0);
            state.second_moment.emplace_back(p.size(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size()) throw std::invalid_argument("adam_step: state shape mismatch");
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].size() != grads[b].size() || state.first_moment[b].size() != params[b].size())
            throw std::invalid_argument("adam_step: block " + std::to_string(b) + " shape mismatch");
    }
    ++state.step;
    const auto t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto& m = state.first_moment[b];
        auto& v = state.second_moment[b];
        for (std::size_t i = 0; i < params[b].size(); ++i) {
            const double g = grads[b][i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            params[b][i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must be in (0, 1)");
    if (patience == 0) throw ConfigError("patience must be >= 1");
    if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
}

bool EarlyStopping::observe(double val_loss) {
    ++epochs_;
    if (val_loss < best_) {
        best_ = val_loss;
        best_epoch_ = epochs_;
        stagnant_ = 0;
        return true;
    }
    ++stagnant_;
    return false;
}

nlohmann::json TrainHistory::to_json() const {
    return {{"initial_train_loss", initial_train_loss},
            {"initial_val_loss", initial_val_loss},
            {"train_loss", train_loss},
            {"val_loss", val_loss},
            {"best_epoch", best_epoch},
            {"epochs_run", train_loss.size()},
            {"early_stopped", early_stopped}};
}

double evaluate_loss(const MlpModel& model, const Matrix& inputs, const Matrix& targets, LossKind kind) {
    if (inputs.rows() != targets.rows() || inputs.rows() == 0) throw DataError("evaluate_loss: shape mismatch");
    constexpr std::size_t kChunk = 4096;
    double total = 0.0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < inputs.rows(); start += kChunk) {
        const auto end = std::min(inputs.rows(), start + kChunk);
        idx.resize(end - start);
        std::iota(idx.begin(), idx.end(), start);
        const auto pred = model.predict(inputs.select_rows(idx));
        const auto tgt = targets.select_rows(idx);
        for (std::size_t r = 0; r < pred.rows(); ++r) total += loss(kind, pred.row(r), tgt.row(r)).value;
    }
    return total / static_cast<double>(inputs.rows());
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double val_fraction,
                                                                            std::uint64_t seed) {
    if (n < 2) throw DataError("split_indices: need at least 2 rows");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_fraction));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> tr(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val.begin(), val.end());
    std::sort(tr.begin(), tr.end());
    return {tr, val};
}

Matrix one_hot(const std::vector<int>& labels, std::size_t classes) {
    Matrix m(labels.size(), classes);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= classes)
            throw DataError("one_hot: label out of range at row " + std::to_string(r));
        m(r, static_cast<std::size_t>(labels[r])) = 1.0;
    }
    return m;
}

TrainResult train(MlpModel model, const Matrix& inputs, const Matrix& targets, const TrainConfig& cfg) {
    cfg.validate();
    if (inputs.rows() == 0) throw DataError("train: empty data");
    if (inputs.rows() != targets.rows()) throw DataError("train: inputs and targets are not aligned");
    auto [tr, val] = split_indices(inputs.rows(), cfg.val_fraction, cfg.seed ^ 0x5bd1e995ULL);
    return train(std::move(model), inputs.select_rows(tr), targets.select_rows(tr), inputs.select_rows(val),
                 targets.select_rows(val), cfg);
}

TrainResult train(MlpModel model, const Matrix& inputs, const Matrix& targets, const Matrix& val_inputs,
                  const Matrix& val_targets, const TrainConfig& cfg) {
    cfg.validate();
    if (inputs.rows() == 0 || val_inputs.rows() == 0) throw DataError("train: empty data");
    if (inputs.rows() != targets.rows() || val_inputs.rows() != val_targets.rows())
        throw DataError("train: inputs and targets are not aligned");
    if (inputs.cols() != model.input_dim() || val_inputs.cols() != model.input_dim())
        throw DataError("train: input width does not match the model");
    if (targets.cols() != model.output_dim() || val_targets.cols() != model.output_dim())
        throw DataError("train: target width does not match the model");

    const bool fused = cfg.loss == LossKind::CrossEntropy && model.layers().back().spec.activation == Activation::Softmax;
    Rng rng(cfg.seed);
    AdamState adam;
    adam.learning_rate = cfg.learning_rate;

    TrainResult result;
    auto& hist = result.history;
    model.set_mode(Mode::Infer);
    hist.initial_train_loss = evaluate_loss(model, inputs, targets, cfg.loss);
    hist.initial_val_loss = evaluate_loss(model, val_inputs, val_targets, cfg.loss);
    result.model = model;

    EarlyStopping stopper(cfg.patience);
    std::vector<std::size_t> order(inputs.rows());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        model.set_mode(Mode::Train);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const auto end = std::min(order.size(), start + cfg.batch_size);
            const std::span<const std::size_t> idx(order.data() + start, end - start);
            const Matrix x = inputs.select_rows(idx);
            const Matrix t = targets.select_rows(idx);
            const auto cache = forward(model, x, &rng);
            Gradients grads;
            if (fused) {
                const auto& p = cache.output();
                Matrix pre_grad(p.rows(), p.cols());
                const auto rows = static_cast<double>(p.rows());
                double batch_value = 0.0;
                for (std::size_t r = 0; r < p.rows(); ++r) {
                    batch_value += loss(LossKind::CrossEntropy, p.row(r), t.row(r)).value;
                    for (std::size_t c = 0; c < p.cols(); ++c) pre_grad(r, c) = (p(r, c) - t(r, c)) / rows;
                }
                epoch_loss += batch_value;
                grads = backward_from_preactivation(model, cache, pre_grad);
            } else {
                const auto bl = batch_loss(cfg.loss, cache.output(), t);
                epoch_loss += bl.value * static_cast<double>(x.rows());
                grads = backward(model, cache, bl.grad);
            }
            seen += x.rows();
            adam_step(adam, model.parameter_blocks(), grads.blocks());
        }
        model.set_mode(Mode::Infer);
        hist.train_loss.push_back(epoch_loss / static_cast<double>(seen));
        const double v = evaluate_loss(model, val_inputs, val_targets, cfg.loss);
        hist.val_loss.push_back(v);
        if (stopper.observe(v)) {
            result.model = model;
            hist.best_epoch = stopper.best_epoch();
        }
        if (stopper.stop()) {
            hist.early_stopped = true;
            break;
        }
    }
    result.model.set_mode(Mode::Infer);
    return result;
}

}  // namespace nids
