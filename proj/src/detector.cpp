#include "nids/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "nids/error.hpp"
#include "nids/metrics.hpp"

namespace nids {

std::vector<LayerSpec> AutoencoderConfig::layers() const {
    if (hidden_dim == 0 || hidden_dim >= input_dim) throw ConfigError("autoencoder hidden_dim must be in [1, input_dim)");
    return {
        {input_dim, hidden_dim, encoder_activation, dropout, noise_sigma},
        {hidden_dim, input_dim, output_activation, 0.0, 0.0},
    };
}

Calibration parse_calibration(const std::string& text) {
    if (text == "labeled-f1" || text == "labeled_f1") return LabeledF1Calibration{};
    const std::string prefix = "quantile";
    if (text.rfind(prefix, 0) == 0) {
        QuantileCalibration q;
        if (text.size() > prefix.size()) {
            if (text[prefix.size()] != ':') throw ConfigError("bad calibration '" + text + "'");
            try {
                std::size_t used = 0;
                q.q = std::stod(text.substr(prefix.size() + 1), &used);
                if (used != text.size() - prefix.size() - 1) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ConfigError("bad quantile in calibration '" + text + "'");
            }
        }
        if (!(q.q > 0.0 && q.q <= 1.0)) throw ConfigError("calibration quantile must be in (0, 1]");
        return q;
    }
    throw ConfigError("unknown calibration '" + text + "' (expected quantile:<q> or labeled-f1)");
}

std::string calibration_name(const Calibration& c) {
    if (std::holds_alternative<LabeledF1Calibration>(c)) return "labeled-f1";
    char buf[32];
    std::snprintf(buf, sizeof buf, "quantile:%g", std::get<QuantileCalibration>(c).q);
    return buf;
}

std::vector<double> reconstruction_errors(const MlpModel& autoencoder, const Matrix& batch) {
    if (batch.cols() != autoencoder.input_dim())
        throw DataError("reconstruction_error: width " + std::to_string(batch.cols()) + " != " +
                        std::to_string(autoencoder.input_dim()));
    const Matrix recon = autoencoder.predict(batch);
    std::vector<double> err(batch.rows());
    for (std::size_t r = 0; r < batch.rows(); ++r) err[r] = squared_distance(batch.row(r), recon.row(r));
    return err;
}

AnomalyDetector::AnomalyDetector(MlpModel autoencoder, double alpha, Calibration calibration)
    : autoencoder_(std::move(autoencoder)), alpha_(alpha), calibration_(calibration) {
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw ConfigError("detector alpha must be finite and > 0");
    autoencoder_.set_mode(Mode::Infer);
}

double AnomalyDetector::reconstruction_error(std::span<const double> x) const {
    Matrix m;
    m.append_row(x);
    return nids::reconstruction_errors(autoencoder_, m).front();
}

std::vector<double> AnomalyDetector::reconstruction_errors(const Matrix& batch) const {
    return nids::reconstruction_errors(autoencoder_, batch);
}

std::vector<ScoredSample> AnomalyDetector::detect(const Matrix& batch) const {
    const auto err = reconstruction_errors(batch);
    std::vector<ScoredSample> out(err.size());
    for (std::size_t i = 0; i < err.size(); ++i) out[i] = {err[i], verdict_for(err[i], alpha_)};
    return out;
}

nlohmann::json AnomalyDetector::to_json() const {
    nlohmann::json cal = {{"method", std::holds_alternative<LabeledF1Calibration>(calibration_) ? "labeled-f1" : "quantile"}};
    if (const auto* q = std::get_if<QuantileCalibration>(&calibration_)) cal["q"] = q->q;
    return {{"format_version", kFormatVersion},
            {"kind", "detector"},
            {"model", autoencoder_.to_json()},
            {"alpha", alpha_},
            {"calibration", cal}};
}

AnomalyDetector AnomalyDetector::from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "detector") throw FormatError("not a detector document");
    if (j.value("format_version", -1) != kFormatVersion)
        throw FormatError("detector format_version mismatch (expected " + std::to_string(kFormatVersion) + ")");
    const auto& cal = j.at("calibration");
    Calibration c = LabeledF1Calibration{};
    if (cal.at("method").get<std::string>() == "quantile") c = QuantileCalibration{cal.at("q").get<double>()};
    return AnomalyDetector(MlpModel::from_json(j.at("model")), j.at("alpha").get<double>(), c);
}

namespace {

void require_normals(const FeatureMatrix& fm, const char* what) {
    if (fm.rows() == 0) throw DataError(std::string(what) + ": no rows");
    for (std::size_t i = 0; i < fm.labels.size(); ++i) {
        if (fm.labels[i] != 0) throw DataError(std::string(what) + ": row " + std::to_string(i) + " is not normal");
    }
}

}  // namespace

TrainResult train_on_normal(const FeatureMatrix& normals, const AutoencoderConfig& cfg, const TrainConfig& tcfg) {
    require_normals(normals, "train_on_normal");
    auto [tr, val] = split_indices(normals.rows(), tcfg.val_fraction, tcfg.seed);
    return train_on_normal(normals.select(tr), normals.select(val), cfg, tcfg);
}

TrainResult train_on_normal(const FeatureMatrix& normals, const FeatureMatrix& validation_normals,
                            const AutoencoderConfig& cfg, const TrainConfig& tcfg) {
    require_normals(normals, "train_on_normal");
    require_normals(validation_normals, "train_on_normal validation");
    if (normals.values.cols() != cfg.input_dim) throw DataError("train_on_normal: input width does not match config");
    auto model = MlpModel::create(cfg.layers(), tcfg.seed);
    auto t = tcfg;
    t.loss = LossKind::Mse;
    return train(std::move(model), normals.values, normals.values, validation_normals.values, validation_normals.values,
                 t);
}

double nearest_rank_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("quantile of an empty set");
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("quantile must be in (0, 1]");
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size()) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

double best_f1_threshold(const std::vector<double>& errors, const std::vector<int>& labels) {
    if (errors.size() != labels.size() || errors.empty()) throw DataError("best_f1_threshold: misaligned input");
    std::size_t positives = 0;
    for (int l : labels) positives += l == 1 ? 1 : 0;
    if (positives == 0 || positives == labels.size())
        throw DataError("labeled-f1 calibration needs both normal and attack rows");

    std::vector<std::size_t> order(errors.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return errors[a] < errors[b]; });
    // Sweep alpha upward over distinct observed errors; rows with error <= alpha are normal.
    std::size_t tp = positives;
    std::size_t fp = labels.size() - positives;
    double best_f1 = -1.0;
    double best_alpha = errors[order.front()];
    for (std::size_t i = 0; i < order.size();) {
        const double alpha = errors[order[i]];
        while (i < order.size() && errors[order[i]] == alpha) {
            if (labels[order[i]] == 1) --tp;
            else --fp;
            ++i;
        }
        const double precision = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
        const double recall = safe_ratio(static_cast<double>(tp), static_cast<double>(positives));
        const double f1 = f1_from(precision, recall);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_alpha = alpha;
        }
    }
    return best_alpha;
}

double calibrate_threshold(const MlpModel& autoencoder, const FeatureMatrix& validation, const Calibration& method) {
    if (validation.rows() == 0) throw DataError("calibrate_threshold: empty validation set");
    const auto err = reconstruction_errors(autoencoder, validation.values);
    double alpha = 0.0;
    if (const auto* q = std::get_if<QuantileCalibration>(&method)) {
        std::vector<double> normal_err;
        for (std::size_t i = 0; i < err.size(); ++i) {
            if (validation.labels[i] == 0) normal_err.push_back(err[i]);
        }
        alpha = nearest_rank_quantile(std::move(normal_err), q->q);
    } else {
        alpha = best_f1_threshold(err, validation.labels);
    }
    // alpha must stay positive; an all-zero error set keeps every row normal.
    return std::max(alpha, std::numeric_limits<double>::min());
}

}  // namespace nids
