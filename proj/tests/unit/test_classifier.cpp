#include <doctest.h>

#include <numeric>

#include "nids/classifier.hpp"
#include "nids/error.hpp"
#include "support.hpp"

using namespace nids;

namespace {

FeatureMatrix four_blobs(const std::vector<std::size_t>& counts, std::size_t dim, std::uint64_t seed) {
    FeatureMatrix fm;
    Rng rng(seed);
    std::normal_distribution<double> n(0.0, 0.4);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        for (std::size_t i = 0; i < counts[c]; ++i) {
            std::vector<double> row(dim);
            for (std::size_t d = 0; d < dim; ++d) row[d] = n(rng) + ((d % 4) == c ? 3.0 : 0.0);
            fm.values.append_row(row);
            fm.labels.push_back(static_cast<int>(c));
        }
    }
    return fm;
}

TrainConfig quick(std::uint64_t seed) {
    TrainConfig t;
    t.max_epochs = 40;
    t.seed = seed;
    return t;
}

}  // namespace

TEST_CASE("argmax tie rule and class order") {
    CHECK(argmax(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == 0);
    CHECK(argmax(std::vector<double>{0.9, 0.05, 0.03, 0.02}) == 0);
    CHECK(argmax(std::vector<double>{0.1, 0.4, 0.4, 0.1}) == 1);
    CHECK(attack_class_names() == std::vector<std::string>{"DoS", "Probe", "R2L", "U2R"});
    const auto m = MlpModel::create(DnnConfig{}.layers(), 1);
    CHECK(m.input_dim() == 41);
    CHECK(m.layers()[0].spec.out_dim == 80);
    CHECK(m.layers()[0].spec.activation == Activation::Relu);
    CHECK(m.layers()[1].spec.activation == Activation::Softmax);
    CHECK(m.output_dim() == 4);
}

TEST_CASE("prediction probabilities sum to one") {
    const AttackClassifier clf(MlpModel::create(DnnConfig{}.layers(), 2), false);
    const auto x = testing::random_matrix(100, 41, 3, 3.0);
    for (const auto& p : clf.predict(x)) {
        CHECK(std::abs(std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0) - 1.0) < 1e-9);
        CHECK(p.category == argmax(p.probabilities));
    }
    CHECK_THROWS_AS(clf.predict(Matrix(2, 40)), DataError);
}

TEST_CASE("four-class training on separable blobs") {
    const auto data = four_blobs({120, 60, 30, 12}, 8, 1);
    DnnConfig dnn;
    dnn.input_dim = 8;
    dnn.hidden_dim = 16;
    const auto plain = train_fourclass(data, std::nullopt, quick(3), dnn);
    CHECK_FALSE(plain.classifier.trained_with_oversampling());
    const auto rep = evaluate_fourclass(plain.classifier, data);
    CHECK(rep.accuracy > 0.9);
    for (std::size_t c = 0; c < 4; ++c)
        CHECK(rep.confusion.row_sum(c) == static_cast<std::uint64_t>(std::count(data.labels.begin(), data.labels.end(), int(c))));

    const auto before = data.values;
    const auto over = train_fourclass(data, SvmSmoteConfig{}, quick(3), dnn);
    CHECK(over.classifier.trained_with_oversampling());
    CHECK(data.values == before);
    for (std::size_t c = 1; c < 4; ++c) CHECK(over.class_counts[c] == over.class_counts[0]);
    CHECK_FALSE(over.synthetic_counts.empty());

    const auto again = train_fourclass(data, SvmSmoteConfig{}, quick(3), dnn);
    CHECK(again.classifier.model().same_parameters(over.classifier.model()));

    auto missing = four_blobs({20, 20, 20, 0}, 8, 2);
    CHECK_THROWS_AS(train_fourclass(missing, std::nullopt, quick(1), dnn), DataError);
}

TEST_CASE("perfect predictions give a diagonal report") {
    const auto cm = confusion({0, 1, 2, 3, 3}, {0, 1, 2, 3, 3}, attack_class_names());
    const auto rep = multiclass_report(cm);
    for (double f : rep.per_class_f1) CHECK(f == 1.0);
    CHECK(rep.macro_f1 == 1.0);
}

TEST_CASE("classifier JSON keeps class order and version") {
    const AttackClassifier clf(MlpModel::create(DnnConfig{}.layers(), 5), true);
    const auto j = clf.to_json();
    CHECK(j.at("class_order") == nlohmann::json({"DoS", "Probe", "R2L", "U2R"}));
    const auto back = AttackClassifier::from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.trained_with_oversampling());
    const auto x = testing::random_matrix(20, 41, 1);
    CHECK(back.predict_labels(x) == clf.predict_labels(x));
    auto skew = j;
    skew["format_version"] = 0;
    CHECK_THROWS_AS(AttackClassifier::from_json(skew), FormatError);
    auto order = j;
    order["class_order"] = {"Probe", "DoS", "R2L", "U2R"};
    CHECK_THROWS_AS(AttackClassifier::from_json(order), FormatError);
}
