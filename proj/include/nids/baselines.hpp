#pragma once

// Supervised binary baselines: CART decision tree, random forest, Gaussian
// naive Bayes, primal linear SVM, AdaBoost over stumps, gradient boosting and
// a small MLP. Labels are class indices (0 = normal, 1 = attack for the binary
// task) unless stated otherwise.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nids/matrix.hpp"
#include "nids/neuralcore.hpp"

namespace nids {

// ---------------------------------------------------------------------------
// Trees

struct DecisionTreeConfig {
    std::size_t max_depth = 12;
    std::size_t min_samples_split = 2;
    // Candidate features examined per split; 0 means all of them.
    std::size_t features_per_split = 0;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;   // x[feature] <= threshold
    int right = -1;  // x[feature] > threshold
    int label = 0;   // classification leaves
    double value = 0.0;  // regression leaves
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t leaf_index(std::span<const double> x) const;
    int predict_row(std::span<const double> x) const { return nodes_[leaf_index(x)].label; }
    double value_row(std::span<const double> x) const { return nodes_[leaf_index(x)].value; }
    std::vector<int> predict(const Matrix& x) const;
    std::size_t depth() const;

    // Nested node objects.
    nlohmann::json to_json() const;
    static DecisionTree from_json(const nlohmann::json& j);

private:
    std::vector<TreeNode> nodes_;
};

double gini(std::span<const double> class_weights);

// Gini-impurity CART. Optional per-row weights (AdaBoost).
DecisionTree fit_tree(const Matrix& x, const std::vector<int>& labels, const DecisionTreeConfig& cfg,
                      std::span<const double> weights = {});

// Variance-reduction regression tree; leaves hold leaf_value(rows in leaf).
DecisionTree fit_regression_tree(const Matrix& x, std::span<const double> targets, const DecisionTreeConfig& cfg,
                                 const std::function<double(std::span<const std::uint32_t>)>& leaf_value);

struct ForestConfig {
    std::size_t n_trees = 100;
    bool bootstrap = true;  // sample n rows with replacement per tree
    // 0 means round(sqrt(n_features)).
    std::size_t features_per_split = 0;
    DecisionTreeConfig tree;
    std::uint64_t seed = 0;
    std::size_t threads = 0;  // 0 = hardware concurrency
};

class RandomForest {
public:
    RandomForest() = default;
    RandomForest(std::vector<DecisionTree> trees, int n_classes) : trees_(std::move(trees)), n_classes_(n_classes) {}
    std::vector<int> predict(const Matrix& x) const;
    const std::vector<DecisionTree>& trees() const { return trees_; }
    nlohmann::json to_json() const;

private:
    std::vector<DecisionTree> trees_;
    int n_classes_ = 2;
};

// Majority vote; ties go to the lower class index.
int majority_vote(std::span<const int> votes, int n_classes);

RandomForest fit_forest(const Matrix& x, const std::vector<int>& labels, const ForestConfig& cfg);

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

class GaussianNaiveBayes {
public:
    static inline constexpr double kVarianceFloor = 1e-9;

    std::vector<double> log_posterior(std::span<const double> x) const;  // unnormalized
    int predict_row(std::span<const double> x) const;
    std::vector<int> predict(const Matrix& x) const;
    nlohmann::json to_json() const;

    std::vector<double> priors;
    std::vector<std::vector<double>> means;
    std::vector<std::vector<double>> variances;
};

GaussianNaiveBayes fit_gnb(const Matrix& x, const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Linear SVM

struct LinearSvmConfig {
    double lambda = 1e-4;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;
};

struct LinearSvm {
    std::vector<double> weights;
    double bias = 0.0;
    // Training rows with hinge loss > 0 at the final iterate.
    std::vector<std::size_t> margin_violators;

    double decision(std::span<const double> x) const;
    // +1 if decision > 0, else -1.
    int predict_sign(std::span<const double> x) const { return decision(x) > 0.0 ? 1 : -1; }
    nlohmann::json to_json() const;
};

// Labels must be -1/+1. Pegasos-style subgradient descent on
// lambda/2 |w|^2 + mean hinge, with step 1/(lambda t); the bias is treated as
// a weight on a constant feature.
LinearSvm fit_linear_svm(const Matrix& x, const std::vector<int>& signs, const LinearSvmConfig& cfg);

// ---------------------------------------------------------------------------
// Boosting

struct AdaBoostConfig {
    std::size_t n_rounds = 100;
};

struct AdaBoost {
    std::vector<DecisionTree> stumps;
    std::vector<double> alphas;
    int fallback_label = 0;  // used when no round was kept

    double score(std::span<const double> x) const;  // sum alpha * (+1/-1)
    std::vector<int> predict(const Matrix& x) const;
    nlohmann::json to_json() const;
};

// Called after every round with the normalized sample weights (for tests).
using WeightObserver = std::function<void(std::size_t round, std::span<const double> weights)>;

AdaBoost fit_adaboost(const Matrix& x, const std::vector<int>& labels, const AdaBoostConfig& cfg,
                      const WeightObserver& observer = {});

double adaboost_alpha(double weighted_error);

struct GradientBoostConfig {
    std::size_t n_rounds = 100;
    double learning_rate = 0.1;
    std::size_t max_depth = 3;
};

struct GradientBoost {
    double prior_log_odds = 0.0;
    double learning_rate = 0.1;
    std::vector<DecisionTree> trees;

    double score(std::span<const double> x) const;
    std::vector<int> predict(const Matrix& x) const;  // score > 0 -> 1
    nlohmann::json to_json() const;
};

GradientBoost fit_gradient_boost(const Matrix& x, const std::vector<int>& labels, const GradientBoostConfig& cfg);

// ---------------------------------------------------------------------------
// Uniform front end used by the CLI and the acceptance suite.

class BinaryModel {
public:
    virtual ~BinaryModel() = default;
    virtual std::vector<int> predict(const Matrix& x) const = 0;
    virtual nlohmann::json to_json() const = 0;
};

struct BaselineSettings {
    DecisionTreeConfig tree;
    ForestConfig forest;
    LinearSvmConfig svm;
    AdaBoostConfig adaboost;
    GradientBoostConfig gradient_boost;
    TrainConfig mlp_train{.loss = LossKind::CrossEntropy};
    std::size_t mlp_hidden = 80;
    std::uint64_t seed = 0;
};

const std::vector<std::string>& baseline_names();

// Throws ConfigError listing the valid names for an unknown name.
std::unique_ptr<BinaryModel> fit_baseline(const std::string& name, const Matrix& x, const std::vector<int>& labels,
                                          const BaselineSettings& settings);

}  // namespace nids
