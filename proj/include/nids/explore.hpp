#pragma once

// Plot-ready exploration data: per-category histograms, Pearson correlation,
// scatter exports and constant-feature detection.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nids/dataset.hpp"
#include "nids/matrix.hpp"

namespace nids {

struct HistogramReport {
    std::string feature;
    std::vector<double> edges;  // bins + 1, strictly increasing
    // counts[category][bin], categories in Category order.
    std::vector<std::vector<std::size_t>> counts;

    std::string to_csv() const;
};

// values/categories are row-aligned. Uniform bins over the pooled [min, max];
// the last bin is closed on the right. A constant column gets the single
// edge pair [v - 0.5, v + 0.5].
HistogramReport histogram(std::span<const double> values, std::span<const Category> categories,
                          const std::string& feature, std::size_t bins = 40);

struct CorrelationMatrix {
    std::vector<std::string> names;
    // NaN entries never appear: undefined pairs are reported through `defined`.
    std::vector<std::vector<double>> r;
    std::vector<bool> constant;

    bool defined(std::size_t i, std::size_t j) const { return !constant[i] && !constant[j]; }
    std::string to_csv() const;
};

CorrelationMatrix pearson_matrix(const Matrix& m, std::vector<std::string> names);

struct ConstantFeature {
    std::string name;
    double value = 0.0;
};

struct RedundancyReport {
    std::vector<ConstantFeature> constant_features;
    nlohmann::json to_json() const;
};

RedundancyReport find_constant_features(const Matrix& m, const std::vector<std::string>& names);

// "x,y,category" header plus one line per row.
std::string scatter_csv(std::span<const double> x, std::span<const double> y, std::span<const Category> categories,
                        const std::string& x_name, const std::string& y_name);

struct ScatterRow {
    double x = 0.0;
    double y = 0.0;
    std::string category;
    bool operator==(const ScatterRow&) const = default;
};
std::vector<ScatterRow> parse_scatter_csv(const std::string& text);

struct ExploreOptions {
    std::size_t bins = 40;
    std::vector<std::string> histogram_features;  // empty: all 41
    std::vector<std::pair<std::string, std::string>> scatter_pairs;
};

// Default scatter pairs (probe-related traffic features).
std::vector<std::pair<std::string, std::string>> default_scatter_pairs();

// Writes histograms/<feature>.csv, correlation.csv, scatter_<x>_<y>.csv and
// redundancy.json under out_dir. Histograms and correlation use the
// LabelCount-encoded feature values.
void write_exploration(const LabeledDataset& ds, const AttackTaxonomy& taxonomy, const std::filesystem::path& out_dir,
                       const ExploreOptions& options = {});

}  // namespace nids
