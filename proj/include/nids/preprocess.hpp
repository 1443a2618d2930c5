#pragma once

// Fit-on-train / apply-everywhere feature transformation: LabelCount encoding
// of the categorical features followed by z-score standardization.

#include <array>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nids/dataset.hpp"
#include "nids/matrix.hpp"

namespace nids {

// Encoded, standardized rows with an aligned label vector.
struct FeatureMatrix {
    Matrix values;
    std::vector<int> labels;
    Split split = Split::Fixture;

    std::size_t rows() const { return values.rows(); }
    FeatureMatrix select(std::span<const std::size_t> indices) const;
};

// Per categorical feature: category -> (train count, code). Codes run 1..K in
// ascending frequency, ties broken by name (smaller name, smaller code).
// Code 0 is reserved for categories never seen in training.
class LabelCountEncoder {
public:
    struct Entry {
        std::size_t count = 0;
        int code = 0;
        bool operator==(const Entry&) const = default;
    };
    using Table = std::map<std::string, Entry, std::less<>>;

    static Table build_table(const std::map<std::string, std::size_t, std::less<>>& counts);

    int code(std::size_t slot, std::string_view category) const;
    const std::array<Table, 3>& tables() const { return tables_; }
    std::array<Table, 3>& tables() { return tables_; }

    bool operator==(const LabelCountEncoder&) const = default;

private:
    std::array<Table, 3> tables_;
};

LabelCountEncoder fit_encoder(const LabeledDataset& train);
// n x 41 matrix: categorical columns replaced by codes, numeric columns passed through.
Matrix encode(const LabelCountEncoder& enc, const LabeledDataset& ds);

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // population definition
    bool operator==(const Standardizer&) const = default;
};

Standardizer fit_standardizer(const Matrix& m);
// Z = (x - mean) / stddev; zero-variance columns map to 0.
Matrix standardize(const Standardizer& s, const Matrix& m);

class FittedPipeline {
public:
    static inline constexpr int kFormatVersion = 1;

    static FittedPipeline fit(const LabeledDataset& train, bool drop_constant = false);

    FeatureMatrix transform(const LabeledDataset& ds, std::vector<int> labels) const;
    Matrix transform_values(const LabeledDataset& ds) const;

    std::size_t output_width() const { return kept_columns_.size(); }
    const std::vector<std::size_t>& kept_columns() const { return kept_columns_; }
    const LabelCountEncoder& encoder() const { return encoder_; }
    const Standardizer& standardizer() const { return standardizer_; }

    nlohmann::json to_json() const;
    static FittedPipeline from_json(const nlohmann::json& j);

    bool operator==(const FittedPipeline&) const = default;

private:
    LabelCountEncoder encoder_;
    Standardizer standardizer_;
    std::vector<std::size_t> kept_columns_;
};

}  // namespace nids
