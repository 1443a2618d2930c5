#pragma once

// Stage-1 anomaly detector: an autoencoder trained on normal traffic only;
// rows whose reconstruction error exceeds alpha are flagged as attacks.

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nids/neuralcore.hpp"
#include "nids/preprocess.hpp"

namespace nids {

struct AutoencoderConfig {
    std::size_t input_dim = 41;
    std::size_t hidden_dim = 15;
    Activation encoder_activation = Activation::Selu;
    Activation output_activation = Activation::Identity;
    double noise_sigma = 0.15;
    double dropout = 0.05;

    std::vector<LayerSpec> layers() const;
};

struct QuantileCalibration {
    double q = 0.95;
};
struct LabeledF1Calibration {};
using Calibration = std::variant<QuantileCalibration, LabeledF1Calibration>;

// "quantile:0.95" or "labeled-f1".
Calibration parse_calibration(const std::string& text);
std::string calibration_name(const Calibration& c);

enum class Verdict { Normal = 0, Attack = 1 };

struct ScoredSample {
    double reconstruction_error = 0.0;
    Verdict verdict = Verdict::Normal;
};

class AnomalyDetector {
public:
    static inline constexpr int kFormatVersion = 1;

    AnomalyDetector() = default;
    AnomalyDetector(MlpModel autoencoder, double alpha, Calibration calibration);

    const MlpModel& autoencoder() const { return autoencoder_; }
    double alpha() const { return alpha_; }
    const Calibration& calibration() const { return calibration_; }

    double reconstruction_error(std::span<const double> x) const;
    std::vector<double> reconstruction_errors(const Matrix& batch) const;
    std::vector<ScoredSample> detect(const Matrix& batch) const;

    nlohmann::json to_json() const;
    static AnomalyDetector from_json(const nlohmann::json& j);

private:
    MlpModel autoencoder_;
    double alpha_ = 0.0;
    Calibration calibration_;
};

// Error > alpha is an attack; equality stays normal.
inline Verdict verdict_for(double error, double alpha) { return error > alpha ? Verdict::Attack : Verdict::Normal; }

// Squared Euclidean reconstruction errors in inference mode.
std::vector<double> reconstruction_errors(const MlpModel& autoencoder, const Matrix& batch);

// Training targets are the clean inputs. Throws if any label is not 0 (normal).
TrainResult train_on_normal(const FeatureMatrix& normals, const AutoencoderConfig& cfg, const TrainConfig& tcfg);
TrainResult train_on_normal(const FeatureMatrix& normals, const FeatureMatrix& validation_normals,
                            const AutoencoderConfig& cfg, const TrainConfig& tcfg);

// Nearest-rank empirical quantile: the ceil(q n)-th smallest value.
double nearest_rank_quantile(std::vector<double> values, double q);

// Threshold maximizing F1 (attack positive) over the observed errors.
// labels: 0 normal, 1 attack; both must be present.
double best_f1_threshold(const std::vector<double>& errors, const std::vector<int>& labels);

// quantile: uses the rows of `validation` labelled normal.
// labeled_f1: uses all rows of `validation` with their labels.
double calibrate_threshold(const MlpModel& autoencoder, const FeatureMatrix& validation, const Calibration& method);

}  // namespace nids
