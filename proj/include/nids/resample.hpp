#pragma once

// Synthetic minority oversampling: plain SMOTE and the SVM-seeded variant.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nids/baselines.hpp"
#include "nids/matrix.hpp"
#include "nids/preprocess.hpp"

namespace nids {

// Indices of the k pool rows closest to query (Euclidean), nearest first;
// ties go to the lower index. `exclude` removes one pool row from candidacy.
std::vector<std::size_t> knn(std::span<const double> query, const Matrix& pool, std::size_t k,
                             std::optional<std::size_t> exclude = std::nullopt);

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    // class label -> desired row count; classes absent here are left alone.
    std::map<int, std::size_t> target_counts;
    std::uint64_t seed = 0;
};

// Overrides the interpolation factor; used by tests to pin lambda.
using LambdaSource = std::function<double()>;

// n_new rows s = a + lambda (b - a): a cycles over the minority rows in order,
// b is one of a's k nearest minority neighbours (k capped at rows - 1).
Matrix smote_generate(const Matrix& minority, long long n_new, const SmoteConfig& cfg,
                      const LambdaSource& lambda = {});

struct SvmSmoteConfig {
    SmoteConfig smote;
    std::size_t m_neighbors = 10;
    double out_step = 0.5;
    LinearSvmConfig svm;

    void validate() const;
};

struct ResampledSet {
    FeatureMatrix matrix;             // originals first, then synthetics by class
    std::vector<bool> synthetic_mask;
    std::vector<std::string> log;
    std::map<int, std::size_t> synthetic_counts;

    // 43-field export; synthetic rows are labelled synthetic:<class>.
    void write_kdd(std::ostream& out, const std::vector<std::string>& class_names) const;
};

// Targets default to the largest class count for every class.
std::map<int, std::size_t> balance_targets(const std::vector<int>& labels);

ResampledSet svm_smote(const FeatureMatrix& data, const SvmSmoteConfig& cfg);

}  // namespace nids
