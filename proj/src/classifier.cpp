#include "nids/classifier.hpp"

#include <algorithm>

#include "nids/error.hpp"

namespace nids {

const std::vector<std::string>& attack_class_names() {
    static const std::vector<std::string> names = {"DoS", "Probe", "R2L", "U2R"};
    return names;
}

std::vector<LayerSpec> DnnConfig::layers() const {
    if (output_dim != kNumAttackClasses) throw ConfigError("classifier output_dim must equal the attack class count");
    return {
        {input_dim, hidden_dim, Activation::Relu, 0.0, 0.0},
        {hidden_dim, output_dim, Activation::Softmax, 0.0, 0.0},
    };
}

int argmax(std::span<const double> p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] > p[best]) best = i;
    }
    return static_cast<int>(best);
}

std::vector<Prediction> AttackClassifier::predict(const Matrix& batch) const {
    if (batch.cols() != model_.input_dim())
        throw DataError("classifier: batch width " + std::to_string(batch.cols()) + " != " +
                        std::to_string(model_.input_dim()));
    const Matrix p = model_.predict(batch);
    std::vector<Prediction> out(batch.rows());
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        std::copy(p.row(r).begin(), p.row(r).end(), out[r].probabilities.begin());
        out[r].category = argmax(p.row(r));
    }
    return out;
}

std::vector<int> AttackClassifier::predict_labels(const Matrix& batch) const {
    const auto preds = predict(batch);
    std::vector<int> out(preds.size());
    std::transform(preds.begin(), preds.end(), out.begin(), [](const Prediction& p) { return p.category; });
    return out;
}

nlohmann::json AttackClassifier::to_json() const {
    return {{"format_version", kFormatVersion},
            {"kind", "classifier"},
            {"class_order", attack_class_names()},
            {"trained_with_oversampling", oversampled_},
            {"model", model_.to_json()}};
}

AttackClassifier AttackClassifier::from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "classifier") throw FormatError("not a classifier document");
    if (j.value("format_version", -1) != kFormatVersion)
        throw FormatError("classifier format_version mismatch (expected " + std::to_string(kFormatVersion) + ")");
    if (j.at("class_order").get<std::vector<std::string>>() != attack_class_names())
        throw FormatError("classifier class order differs from DoS, Probe, R2L, U2R");
    auto model = MlpModel::from_json(j.at("model"));
    if (model.output_dim() != kNumAttackClasses) throw FormatError("classifier network must have 4 outputs");
    return AttackClassifier(std::move(model), j.at("trained_with_oversampling").get<bool>());
}

FourClassTraining train_fourclass(const FeatureMatrix& attacks, const std::optional<SvmSmoteConfig>& oversample,
                                  const TrainConfig& tcfg, const DnnConfig& dnn) {
    if (attacks.rows() == 0) throw DataError("train_fourclass: no rows");
    std::vector<std::size_t> counts(kNumAttackClasses, 0);
    for (int l : attacks.labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= kNumAttackClasses)
            throw DataError("train_fourclass: label outside the four attack classes");
        ++counts[static_cast<std::size_t>(l)];
    }
    for (std::size_t c = 0; c < kNumAttackClasses; ++c) {
        if (counts[c] == 0)
            throw DataError("train_fourclass: class " + attack_class_names()[c] + " is absent from the training data");
    }
    if (attacks.values.cols() != dnn.input_dim) throw DataError("train_fourclass: input width does not match config");

    auto [tr, val] = split_indices(attacks.rows(), tcfg.val_fraction, tcfg.seed);
    FeatureMatrix train_part = attacks.select(tr);
    const FeatureMatrix val_part = attacks.select(val);

    FourClassTraining result;
    if (oversample) {
        auto cfg = *oversample;
        if (cfg.smote.seed == 0) cfg.smote.seed = tcfg.seed;
        auto resampled = svm_smote(train_part, cfg);
        result.resample_log = std::move(resampled.log);
        result.synthetic_counts = std::move(resampled.synthetic_counts);
        train_part = std::move(resampled.matrix);
    }
    result.class_counts.assign(kNumAttackClasses, 0);
    for (int l : train_part.labels) ++result.class_counts[static_cast<std::size_t>(l)];

    auto t = tcfg;
    t.loss = LossKind::CrossEntropy;
    auto trained = train(MlpModel::create(dnn.layers(), tcfg.seed), train_part.values,
                         one_hot(train_part.labels, kNumAttackClasses), val_part.values,
                         one_hot(val_part.labels, kNumAttackClasses), t);
    result.classifier = AttackClassifier(std::move(trained.model), oversample.has_value());
    result.history = std::move(trained.history);
    return result;
}

MulticlassReport evaluate_fourclass(const AttackClassifier& classifier, const FeatureMatrix& test) {
    const auto predicted = classifier.predict_labels(test.values);
    return multiclass_report(confusion(test.labels, predicted, attack_class_names()));
}

}  // namespace nids
