#include "nids/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <mutex>
#include <thread>

#include "nids/error.hpp"

namespace nids {

namespace {

constexpr double kTieTolerance = 1e-12;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Per feature, row indices sorted by value (ties by row index).
using ColumnOrder = std::vector<std::vector<std::uint32_t>>;

ColumnOrder sort_columns(const Matrix& x) {
    ColumnOrder order(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto& o = order[f];
        o.resize(x.rows());
        std::iota(o.begin(), o.end(), 0U);
        std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    }
    return order;
}

int num_classes(const std::vector<int>& labels) {
    int k = 0;
    for (int l : labels) {
        if (l < 0) throw DataError("class labels must be non-negative");
        k = std::max(k, l + 1);
    }
    return std::max(k, 2);
}

class TreeBuilder {
public:
    using LeafFn = std::function<double(std::span<const std::uint32_t>)>;

    TreeBuilder(const Matrix& x, const DecisionTreeConfig& cfg) : x_(x), cfg_(cfg), rng_(cfg.seed) {}

    void classification(const std::vector<int>& labels, int n_classes) {
        labels_ = &labels;
        n_classes_ = n_classes;
    }
    void regression(std::span<const double> targets, const LeafFn& leaf) {
        targets_ = targets;
        leaf_ = &leaf;
    }

    // entries: row per entry (rows may repeat); weights per entry.
    DecisionTree build(std::vector<std::uint32_t> entries, std::vector<double> weights, const ColumnOrder& order) {
        rows_ = std::move(entries);
        weights_ = std::move(weights);
        side_.assign(rows_.size(), 0);

        // Expand the global column order into entry order (handles repeats).
        std::vector<std::uint32_t> start(x_.rows() + 1, 0);
        for (auto r : rows_) ++start[r + 1];
        for (std::size_t r = 0; r < x_.rows(); ++r) start[r + 1] += start[r];
        std::vector<std::uint32_t> by_row(rows_.size());
        {
            auto fill = start;
            for (std::uint32_t e = 0; e < rows_.size(); ++e) by_row[fill[rows_[e]]++] = e;
        }
        std::vector<std::vector<std::uint32_t>> sorted(x_.cols());
        for (std::size_t f = 0; f < x_.cols(); ++f) {
            auto& s = sorted[f];
            s.reserve(rows_.size());
            for (auto r : order[f]) {
                for (auto k = start[r]; k < start[r + 1]; ++k) s.push_back(by_row[k]);
            }
        }
        nodes_.clear();
        grow(std::move(sorted), 0);
        return DecisionTree(std::move(nodes_));
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = std::numeric_limits<double>::infinity();
    };

    double value(std::uint32_t e, std::size_t f) const { return x_(rows_[e], f); }

    int make_leaf(const std::vector<std::uint32_t>& entries) {
        TreeNode leaf;
        if (labels_ != nullptr) {
            std::vector<double> w(static_cast<std::size_t>(n_classes_), 0.0);
            for (auto e : entries) w[static_cast<std::size_t>((*labels_)[rows_[e]])] += weights_[e];
            leaf.label = static_cast<int>(std::max_element(w.begin(), w.end()) - w.begin());
        } else {
            std::vector<std::uint32_t> rows;
            rows.reserve(entries.size());
            for (auto e : entries) rows.push_back(rows_[e]);
            leaf.value = (*leaf_)(rows);
        }
        nodes_.push_back(leaf);
        return static_cast<int>(nodes_.size() - 1);
    }

    bool pure(const std::vector<std::uint32_t>& entries) const {
        if (labels_ == nullptr) {
            for (auto e : entries) {
                if (targets_[rows_[e]] != targets_[rows_[entries.front()]]) return false;
            }
            return true;
        }
        for (auto e : entries) {
            if ((*labels_)[rows_[e]] != (*labels_)[rows_[entries.front()]]) return false;
        }
        return true;
    }

    std::vector<std::size_t> candidate_features() {
        std::vector<std::size_t> all(x_.cols());
        std::iota(all.begin(), all.end(), 0);
        const auto k = cfg_.features_per_split;
        if (k == 0 || k >= all.size()) return all;
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
            std::swap(all[i], all[pick(rng_)]);
        }
        all.resize(k);
        std::sort(all.begin(), all.end());
        return all;
    }

    void consider(Split& best, std::size_t f, double score, double lo, double hi) {
        if (score < best.score - kTieTolerance) {
            double thr = 0.5 * (lo + hi);
            if (!(thr < hi)) thr = lo;
            best = {static_cast<int>(f), thr, score};
        }
    }

    Split best_classification_split(const std::vector<std::vector<std::uint32_t>>& sorted) {
        const auto k = static_cast<std::size_t>(n_classes_);
        std::vector<double> total(k, 0.0);
        for (auto e : sorted[0]) total[static_cast<std::size_t>((*labels_)[rows_[e]])] += weights_[e];
        const double w_total = std::accumulate(total.begin(), total.end(), 0.0);
        Split best;
        best.score = gini(total) - kTieTolerance;  // must strictly improve on the parent
        std::vector<double> left(k);
        std::vector<double> right(k);
        for (auto f : candidate_features()) {
            const auto& s = sorted[f];
            std::fill(left.begin(), left.end(), 0.0);
            double w_left = 0.0;
            for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                const auto c = static_cast<std::size_t>((*labels_)[rows_[s[i]]]);
                left[c] += weights_[s[i]];
                w_left += weights_[s[i]];
                const double a = value(s[i], f);
                const double b = value(s[i + 1], f);
                if (!(a < b)) continue;
                for (std::size_t j = 0; j < k; ++j) right[j] = total[j] - left[j];
                const double w_right = w_total - w_left;
                if (w_total <= 0.0) continue;
                const double score = (w_left * gini(left) + w_right * gini(right)) / w_total;
                consider(best, f, score, a, b);
            }
        }
        return best;
    }

    Split best_regression_split(const std::vector<std::vector<std::uint32_t>>& sorted) {
        double sum = 0.0;
        double sum_sq = 0.0;
        double w_total = 0.0;
        for (auto e : sorted[0]) {
            const double t = targets_[rows_[e]];
            sum += weights_[e] * t;
            sum_sq += weights_[e] * t * t;
            w_total += weights_[e];
        }
        const auto sse = [](double s, double s2, double w) { return w > 0.0 ? s2 - s * s / w : 0.0; };
        Split best;
        best.score = sse(sum, sum_sq, w_total) - 1e-9 * std::max(1.0, std::abs(sum_sq));
        for (auto f : candidate_features()) {
            const auto& s = sorted[f];
            double ls = 0.0, ls2 = 0.0, lw = 0.0;
            for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                const double t = targets_[rows_[s[i]]];
                ls += weights_[s[i]] * t;
                ls2 += weights_[s[i]] * t * t;
                lw += weights_[s[i]];
                const double a = value(s[i], f);
                const double b = value(s[i + 1], f);
                if (!(a < b)) continue;
                const double score = sse(ls, ls2, lw) + sse(sum - ls, sum_sq - ls2, w_total - lw);
                consider(best, f, score, a, b);
            }
        }
        return best;
    }

    int grow(std::vector<std::vector<std::uint32_t>> sorted, std::size_t depth) {
        const auto& entries = sorted[0];
        if (depth >= cfg_.max_depth || entries.size() < std::max<std::size_t>(cfg_.min_samples_split, 2) ||
            pure(entries)) {
            return make_leaf(entries);
        }
        const Split split = labels_ != nullptr ? best_classification_split(sorted) : best_regression_split(sorted);
        if (split.feature < 0) return make_leaf(entries);

        const auto f = static_cast<std::size_t>(split.feature);
        for (auto e : entries) side_[e] = value(e, f) <= split.threshold ? 1 : 0;
        std::vector<std::vector<std::uint32_t>> left(sorted.size());
        std::vector<std::vector<std::uint32_t>> right(sorted.size());
        for (std::size_t g = 0; g < sorted.size(); ++g) {
            for (auto e : sorted[g]) (side_[e] ? left[g] : right[g]).push_back(e);
            std::vector<std::uint32_t>().swap(sorted[g]);
        }
        const auto id = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{split.feature, split.threshold, -1, -1, 0, 0.0});
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        nodes_[static_cast<std::size_t>(id)].left = l;
        nodes_[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    const Matrix& x_;
    DecisionTreeConfig cfg_;
    Rng rng_;
    const std::vector<int>* labels_ = nullptr;
    int n_classes_ = 0;
    std::span<const double> targets_;
    const LeafFn* leaf_ = nullptr;
    std::vector<std::uint32_t> rows_;
    std::vector<double> weights_;
    std::vector<char> side_;
    std::vector<TreeNode> nodes_;
};

DecisionTree fit_tree_with_order(const Matrix& x, const std::vector<int>& labels, int n_classes,
                                 const DecisionTreeConfig& cfg, std::vector<std::uint32_t> entries,
                                 std::vector<double> weights, const ColumnOrder& order) {
    TreeBuilder b(x, cfg);
    b.classification(labels, n_classes);
    return b.build(std::move(entries), std::move(weights), order);
}

void check_fit_input(const Matrix& x, std::size_t n_labels) {
    if (x.rows() == 0) throw DataError("fit: no rows");
    if (x.rows() != n_labels) throw DataError("fit: labels not aligned with rows");
}

nlohmann::json node_json(const std::vector<TreeNode>& nodes, int id) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    if (n.feature < 0) return {{"label", n.label}, {"value", n.value}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"left", node_json(nodes, n.left)},
            {"right", node_json(nodes, n.right)}};
}

int node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes) {
    const auto id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (j.contains("feature")) {
        TreeNode n;
        n.feature = j.at("feature").get<int>();
        n.threshold = j.at("threshold").get<double>();
        n.left = node_from_json(j.at("left"), nodes);
        n.right = node_from_json(j.at("right"), nodes);
        nodes[static_cast<std::size_t>(id)] = n;
    } else {
        nodes[static_cast<std::size_t>(id)].label = j.at("label").get<int>();
        nodes[static_cast<std::size_t>(id)].value = j.at("value").get<double>();
    }
    return id;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

// ---------------------------------------------------------------------------
// DecisionTree

std::size_t DecisionTree::leaf_index(std::span<const double> x) const {
    if (nodes_.empty()) throw std::logic_error("empty tree");
    std::size_t id = 0;
    while (nodes_[id].feature >= 0) {
        const auto& n = nodes_[id];
        id = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return id;
}

std::vector<int> DecisionTree::predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_row(x.row(r));
    return out;
}

std::size_t DecisionTree::depth() const {
    std::function<std::size_t(int)> rec = [&](int id) -> std::size_t {
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        return n.feature < 0 ? 0 : 1 + std::max(rec(n.left), rec(n.right));
    };
    return nodes_.empty() ? 0 : rec(0);
}

nlohmann::json DecisionTree::to_json() const { return node_json(nodes_, 0); }

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
    std::vector<TreeNode> nodes;
    node_from_json(j, nodes);
    return DecisionTree(std::move(nodes));
}

double gini(std::span<const double> class_weights) {
    const double total = std::accumulate(class_weights.begin(), class_weights.end(), 0.0);
    if (total <= 0.0) return 0.0;
    double s = 1.0;
    for (double w : class_weights) s -= (w / total) * (w / total);
    return s;
}

DecisionTree fit_tree(const Matrix& x, const std::vector<int>& labels, const DecisionTreeConfig& cfg,
                      std::span<const double> weights) {
    check_fit_input(x, labels.size());
    if (cfg.max_depth == 0) throw ConfigError("max_depth must be >= 1");
    if (!weights.empty() && weights.size() != x.rows()) throw DataError("fit_tree: weights not aligned");
    std::vector<std::uint32_t> entries(x.rows());
    std::iota(entries.begin(), entries.end(), 0U);
    std::vector<double> w = weights.empty() ? std::vector<double>(x.rows(), 1.0)
                                            : std::vector<double>(weights.begin(), weights.end());
    return fit_tree_with_order(x, labels, num_classes(labels), cfg, std::move(entries), std::move(w), sort_columns(x));
}

DecisionTree fit_regression_tree(const Matrix& x, std::span<const double> targets, const DecisionTreeConfig& cfg,
                                 const std::function<double(std::span<const std::uint32_t>)>& leaf_value) {
    check_fit_input(x, targets.size());
    TreeBuilder b(x, cfg);
    b.regression(targets, leaf_value);
    std::vector<std::uint32_t> entries(x.rows());
    std::iota(entries.begin(), entries.end(), 0U);
    return b.build(std::move(entries), std::vector<double>(x.rows(), 1.0), sort_columns(x));
}

// ---------------------------------------------------------------------------
// Forest

int majority_vote(std::span<const int> votes, int n_classes) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (int v : votes) ++counts.at(static_cast<std::size_t>(v));
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::vector<int> RandomForest::predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    std::vector<int> votes(trees_.size());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t t = 0; t < trees_.size(); ++t) votes[t] = trees_[t].predict_row(x.row(r));
        out[r] = majority_vote(votes, n_classes_);
    }
    return out;
}

nlohmann::json RandomForest::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    return {{"model", "random_forest"}, {"n_classes", n_classes_}, {"trees", trees}};
}

RandomForest fit_forest(const Matrix& x, const std::vector<int>& labels, const ForestConfig& cfg) {
    check_fit_input(x, labels.size());
    if (cfg.n_trees == 0) throw ConfigError("n_trees must be >= 1");
    const int k = num_classes(labels);
    const ColumnOrder order = sort_columns(x);
    DecisionTreeConfig tree_cfg = cfg.tree;
    tree_cfg.features_per_split =
        cfg.features_per_split != 0
            ? cfg.features_per_split
            : static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(x.cols()))));

    std::vector<DecisionTree> trees(cfg.n_trees);
    parallel_for(cfg.n_trees, cfg.threads, [&](std::size_t t) {
        const auto seed = mix_seed(cfg.seed, t);
        std::vector<std::uint32_t> entries(x.rows());
        if (cfg.bootstrap) {
            Rng rng(seed);
            std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(x.rows() - 1));
            for (auto& e : entries) e = pick(rng);
        } else {
            std::iota(entries.begin(), entries.end(), 0U);
        }
        auto tc = tree_cfg;
        tc.seed = mix_seed(seed, 0xF00D);
        trees[t] = fit_tree_with_order(x, labels, k, tc, std::move(entries), std::vector<double>(x.rows(), 1.0), order);
    });
    return RandomForest(std::move(trees), k);
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

std::vector<double> GaussianNaiveBayes::log_posterior(std::span<const double> x) const {
    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    std::vector<double> out(priors.size());
    for (std::size_t c = 0; c < priors.size(); ++c) {
        if (priors[c] <= 0.0) {
            out[c] = -std::numeric_limits<double>::infinity();
            continue;
        }
        double s = std::log(priors[c]);
        for (std::size_t f = 0; f < x.size(); ++f) {
            const double v = variances[c][f];
            const double d = x[f] - means[c][f];
            s -= 0.5 * (kLog2Pi + std::log(v)) + d * d / (2.0 * v);
        }
        out[c] = s;
    }
    return out;
}

int GaussianNaiveBayes::predict_row(std::span<const double> x) const {
    const auto lp = log_posterior(x);
    return static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
}

std::vector<int> GaussianNaiveBayes::predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_row(x.row(r));
    return out;
}

nlohmann::json GaussianNaiveBayes::to_json() const {
    return {{"model", "naive_bayes"}, {"priors", priors}, {"means", means}, {"variances", variances}};
}

GaussianNaiveBayes fit_gnb(const Matrix& x, const std::vector<int>& labels) {
    check_fit_input(x, labels.size());
    const auto k = static_cast<std::size_t>(num_classes(labels));
    GaussianNaiveBayes m;
    std::vector<std::size_t> counts(k, 0);
    m.means.assign(k, std::vector<double>(x.cols(), 0.0));
    m.variances.assign(k, std::vector<double>(x.cols(), 0.0));
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto c = static_cast<std::size_t>(labels[r]);
        ++counts[c];
        for (std::size_t f = 0; f < x.cols(); ++f) m.means[c][f] += x(r, f);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (auto& v : m.means[c]) v /= static_cast<double>(counts[c]);
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto c = static_cast<std::size_t>(labels[r]);
        for (std::size_t f = 0; f < x.cols(); ++f) {
            const double d = x(r, f) - m.means[c][f];
            m.variances[c][f] += d * d;
        }
    }
    m.priors.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        m.priors[c] = static_cast<double>(counts[c]) / static_cast<double>(x.rows());
        for (auto& v : m.variances[c]) {
            v = counts[c] > 0 ? v / static_cast<double>(counts[c]) : 0.0;
            v = std::max(v, GaussianNaiveBayes::kVarianceFloor);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Linear SVM

double LinearSvm::decision(std::span<const double> x) const {
    double s = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * x[i];
    return s;
}

nlohmann::json LinearSvm::to_json() const {
    return {{"model", "svm"}, {"weights", weights}, {"bias", bias}};
}

LinearSvm fit_linear_svm(const Matrix& x, const std::vector<int>& signs, const LinearSvmConfig& cfg) {
    check_fit_input(x, signs.size());
    if (!(cfg.lambda > 0.0)) throw ConfigError("svm lambda must be > 0");
    bool pos = false, neg = false;
    for (int s : signs) {
        if (s == 1) pos = true;
        else if (s == -1) neg = true;
        else throw DataError("fit_linear_svm: labels must be -1 or +1");
    }
    if (!pos || !neg) throw DataError("fit_linear_svm: both classes must be present");

    const std::size_t d = x.cols();
    std::vector<double> w(d + 1, 0.0);  // last slot: bias on a constant 1 feature
    // w is kept as scale * v so the shrink step is O(1).
    double scale = 1.0;
    const double radius = 1.0 / std::sqrt(cfg.lambda);
    double norm_sq = 0.0;  // |scale * v|^2

    std::vector<std::size_t> order(x.rows());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(cfg.seed);
    std::uint64_t t = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto i : order) {
            ++t;
            const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
            const auto xi = x.row(i);
            double margin = w[d];
            for (std::size_t j = 0; j < d; ++j) margin += w[j] * xi[j];
            margin *= scale * signs[i];

            const double shrink = 1.0 - eta * cfg.lambda;
            if (shrink <= 0.0) {
                std::fill(w.begin(), w.end(), 0.0);
                scale = 1.0;
                norm_sq = 0.0;
            } else {
                scale *= shrink;
                norm_sq *= shrink * shrink;
            }
            if (margin < 1.0) {
                const double step = eta * signs[i] / scale;
                double dot = w[d];
                double xx = 1.0;
                for (std::size_t j = 0; j < d; ++j) {
                    dot += w[j] * xi[j];
                    xx += xi[j] * xi[j];
                }
                // |scale*(v + step*x)|^2
                norm_sq += 2.0 * scale * scale * step * dot + scale * scale * step * step * xx;
                for (std::size_t j = 0; j < d; ++j) w[j] += step * xi[j];
                w[d] += step;
            }
            if (norm_sq > radius * radius) {
                const double f = radius / std::sqrt(norm_sq);
                scale *= f;
                norm_sq = radius * radius;
            }
            if (scale < 1e-100 || scale > 1e100) {
                for (auto& v : w) v *= scale;
                scale = 1.0;
            }
        }
    }
    LinearSvm svm;
    svm.weights.resize(d);
    for (std::size_t j = 0; j < d; ++j) svm.weights[j] = w[j] * scale;
    svm.bias = w[d] * scale;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (signs[i] * svm.decision(x.row(i)) < 1.0) svm.margin_violators.push_back(i);
    }
    return svm;
}

// ---------------------------------------------------------------------------
// AdaBoost

double adaboost_alpha(double weighted_error) { return 0.5 * std::log((1.0 - weighted_error) / weighted_error); }

double AdaBoost::score(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t m = 0; m < stumps.size(); ++m) s += alphas[m] * (stumps[m].predict_row(x) == 1 ? 1.0 : -1.0);
    return s;
}

std::vector<int> AdaBoost::predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = stumps.empty() ? fallback_label : (score(x.row(r)) > 0.0 ? 1 : 0);
    return out;
}

nlohmann::json AdaBoost::to_json() const {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& t : stumps) s.push_back(t.to_json());
    return {{"model", "adaboost"}, {"alphas", alphas}, {"stumps", s}, {"fallback_label", fallback_label}};
}

AdaBoost fit_adaboost(const Matrix& x, const std::vector<int>& labels, const AdaBoostConfig& cfg,
                      const WeightObserver& observer) {
    check_fit_input(x, labels.size());
    if (cfg.n_rounds == 0) throw ConfigError("AdaBoost needs at least one round");
    for (int l : labels) {
        if (l != 0 && l != 1) throw DataError("fit_adaboost: labels must be 0/1");
    }
    const auto n = x.rows();
    const ColumnOrder order = sort_columns(x);
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<std::uint32_t> entries(n);
    std::iota(entries.begin(), entries.end(), 0U);

    AdaBoost model;
    model.fallback_label =
        std::count(labels.begin(), labels.end(), 1) * 2 > static_cast<std::ptrdiff_t>(n) ? 1 : 0;
    DecisionTreeConfig stump_cfg;
    stump_cfg.max_depth = 1;
    for (std::size_t m = 0; m < cfg.n_rounds; ++m) {
        auto stump = fit_tree_with_order(x, labels, 2, stump_cfg, entries, w, order);
        const auto pred = stump.predict(x);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred[i] != labels[i]) err += w[i];
        }
        if (err >= 0.5) break;
        const bool perfect = err <= 1e-10;
        const double alpha = adaboost_alpha(std::max(err, 1e-10));
        model.stumps.push_back(std::move(stump));
        model.alphas.push_back(alpha);
        if (perfect) break;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] *= std::exp(pred[i] == labels[i] ? -alpha : alpha);
            total += w[i];
        }
        for (auto& v : w) v /= total;
        if (observer) observer(m, w);
    }
    return model;
}

// ---------------------------------------------------------------------------
// Gradient boosting

double GradientBoost::score(std::span<const double> x) const {
    double s = prior_log_odds;
    for (const auto& t : trees) s += learning_rate * t.value_row(x);
    return s;
}

std::vector<int> GradientBoost::predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = score(x.row(r)) > 0.0 ? 1 : 0;
    return out;
}

nlohmann::json GradientBoost::to_json() const {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& tree : trees) t.push_back(tree.to_json());
    return {{"model", "gradient_boosting"},
            {"prior_log_odds", prior_log_odds},
            {"learning_rate", learning_rate},
            {"trees", t}};
}

GradientBoost fit_gradient_boost(const Matrix& x, const std::vector<int>& labels, const GradientBoostConfig& cfg) {
    check_fit_input(x, labels.size());
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (cfg.max_depth == 0) throw ConfigError("max_depth must be >= 1");
    const auto n = x.rows();
    double positives = 0.0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw DataError("fit_gradient_boost: labels must be 0/1");
        positives += l;
    }
    const double p0 = std::clamp(positives / static_cast<double>(n), 1e-12, 1.0 - 1e-12);
    GradientBoost model;
    model.prior_log_odds = std::log(p0 / (1.0 - p0));
    model.learning_rate = cfg.learning_rate;

    const ColumnOrder order = sort_columns(x);
    std::vector<double> f(n, model.prior_log_odds);
    std::vector<double> residual(n);
    std::vector<double> hessian(n);
    const std::function<double(std::span<const std::uint32_t>)> newton = [&](std::span<const std::uint32_t> rows) {
        double num = 0.0, den = 0.0;
        for (auto r : rows) {
            num += residual[r];
            den += hessian[r];
        }
        return den > 1e-12 ? num / den : 0.0;
    };
    DecisionTreeConfig tree_cfg;
    tree_cfg.max_depth = cfg.max_depth;
    std::vector<std::uint32_t> entries(n);
    std::iota(entries.begin(), entries.end(), 0U);
    for (std::size_t m = 0; m < cfg.n_rounds; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = 1.0 / (1.0 + std::exp(-f[i]));
            residual[i] = labels[i] - p;
            hessian[i] = p * (1.0 - p);
        }
        TreeBuilder b(x, tree_cfg);
        b.regression(residual, newton);
        auto tree = b.build(entries, std::vector<double>(n, 1.0), order);
        for (std::size_t i = 0; i < n; ++i) f[i] += cfg.learning_rate * tree.value_row(x.row(i));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Front end

namespace {

template <typename M>
class Wrapped final : public BinaryModel {
public:
    explicit Wrapped(M m) : m_(std::move(m)) {}
    std::vector<int> predict(const Matrix& x) const override { return m_.predict(x); }
    nlohmann::json to_json() const override { return m_.to_json(); }

private:
    M m_;
};

class TreeModel final : public BinaryModel {
public:
    explicit TreeModel(DecisionTree t) : t_(std::move(t)) {}
    std::vector<int> predict(const Matrix& x) const override { return t_.predict(x); }
    nlohmann::json to_json() const override { return {{"model", "decision_tree"}, {"tree", t_.to_json()}}; }

private:
    DecisionTree t_;
};

class SvmModel final : public BinaryModel {
public:
    explicit SvmModel(LinearSvm s) : s_(std::move(s)) {}
    std::vector<int> predict(const Matrix& x) const override {
        std::vector<int> out(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) out[r] = s_.predict_sign(x.row(r)) > 0 ? 1 : 0;
        return out;
    }
    nlohmann::json to_json() const override { return s_.to_json(); }

private:
    LinearSvm s_;
};

class MlpBinary final : public BinaryModel {
public:
    explicit MlpBinary(MlpModel m) : m_(std::move(m)) {}
    std::vector<int> predict(const Matrix& x) const override {
        const auto p = m_.predict(x);
        std::vector<int> out(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) out[r] = p(r, 1) > p(r, 0) ? 1 : 0;
        return out;
    }
    nlohmann::json to_json() const override { return {{"model", "mlp"}, {"network", m_.to_json()}}; }

private:
    MlpModel m_;
};

}  // namespace

const std::vector<std::string>& baseline_names() {
    static const std::vector<std::string> names = {"decision_tree", "random_forest", "naive_bayes", "svm",
                                                   "adaboost",      "gradient_boosting", "mlp"};
    return names;
}

std::unique_ptr<BinaryModel> fit_baseline(const std::string& name, const Matrix& x, const std::vector<int>& labels,
                                          const BaselineSettings& s) {
    if (name == "decision_tree") {
        auto cfg = s.tree;
        cfg.seed = s.seed;
        return std::make_unique<TreeModel>(fit_tree(x, labels, cfg));
    }
    if (name == "random_forest") {
        auto cfg = s.forest;
        cfg.seed = s.seed;
        return std::make_unique<Wrapped<RandomForest>>(fit_forest(x, labels, cfg));
    }
    if (name == "naive_bayes") return std::make_unique<Wrapped<GaussianNaiveBayes>>(fit_gnb(x, labels));
    if (name == "svm") {
        std::vector<int> signs(labels.size());
        std::transform(labels.begin(), labels.end(), signs.begin(), [](int l) { return l == 1 ? 1 : -1; });
        auto cfg = s.svm;
        cfg.seed = s.seed;
        return std::make_unique<SvmModel>(fit_linear_svm(x, signs, cfg));
    }
    if (name == "adaboost") return std::make_unique<Wrapped<AdaBoost>>(fit_adaboost(x, labels, s.adaboost));
    if (name == "gradient_boosting")
        return std::make_unique<Wrapped<GradientBoost>>(fit_gradient_boost(x, labels, s.gradient_boost));
    if (name == "mlp") {
        auto model = MlpModel::create({{x.cols(), s.mlp_hidden, Activation::Relu, 0.0, 0.0},
                                       {s.mlp_hidden, 2, Activation::Softmax, 0.0, 0.0}},
                                      s.seed);
        auto tc = s.mlp_train;
        tc.seed = s.seed;
        tc.loss = LossKind::CrossEntropy;
        return std::make_unique<MlpBinary>(train(std::move(model), x, one_hot(labels, 2), tc).model);
    }
    std::string valid;
    for (const auto& n : baseline_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown baseline '" + name + "' (valid: " + valid + ")");
}

}  // namespace nids
