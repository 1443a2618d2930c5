#pragma once

// Stage-2 attack-type classifier: 41 -> 80 (ReLU) -> 4 (softmax) network,
// optionally trained on SVM-SMOTE oversampled data.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nids/metrics.hpp"
#include "nids/neuralcore.hpp"
#include "nids/preprocess.hpp"
#include "nids/resample.hpp"

namespace nids {

inline constexpr std::size_t kNumAttackClasses = 4;

// Class indices: DoS = 0, Probe = 1, R2L = 2, U2R = 3.
const std::vector<std::string>& attack_class_names();

struct DnnConfig {
    std::size_t input_dim = 41;
    std::size_t hidden_dim = 80;
    std::size_t output_dim = kNumAttackClasses;

    std::vector<LayerSpec> layers() const;
};

struct Prediction {
    int category = 0;
    std::array<double, kNumAttackClasses> probabilities{};
};

// argmax with ties to the lower index.
int argmax(std::span<const double> p);

class AttackClassifier {
public:
    static inline constexpr int kFormatVersion = 1;

    AttackClassifier() = default;
    AttackClassifier(MlpModel model, bool oversampled) : model_(std::move(model)), oversampled_(oversampled) {}

    const MlpModel& model() const { return model_; }
    bool trained_with_oversampling() const { return oversampled_; }

    std::vector<Prediction> predict(const Matrix& batch) const;
    std::vector<int> predict_labels(const Matrix& batch) const;

    nlohmann::json to_json() const;
    static AttackClassifier from_json(const nlohmann::json& j);

private:
    MlpModel model_;
    bool oversampled_ = false;
};

struct FourClassTraining {
    AttackClassifier classifier;
    TrainHistory history;
    std::vector<std::size_t> class_counts;  // rows per class actually used for training
    std::vector<std::string> resample_log;
    std::map<int, std::size_t> synthetic_counts;
};

// Splits val_fraction off for validation first; oversampling (if requested)
// touches only the training part.
FourClassTraining train_fourclass(const FeatureMatrix& attacks, const std::optional<SvmSmoteConfig>& oversample,
                                  const TrainConfig& tcfg, const DnnConfig& dnn = {});

MulticlassReport evaluate_fourclass(const AttackClassifier& classifier, const FeatureMatrix& test);

}  // namespace nids
