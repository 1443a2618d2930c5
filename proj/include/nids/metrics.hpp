#pragma once

// Confusion matrices and the derived classification scores.
//
// 0/0 ratios resolve to 0. "micro_f1" follows the support-weighted mean of
// per-class F1; pooled_f1 is the conventional global-TP/FP/FN quantity.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace nids {

class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> class_names);

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& class_names() const { return names_; }

    std::uint64_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * size() + predicted]; }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * size() + predicted]; }

    std::uint64_t total() const;
    std::uint64_t trace() const;
    std::uint64_t row_sum(std::size_t truth) const;
    std::uint64_t col_sum(std::size_t predicted) const;

    // CSV with a header row and a leading column of class names.
    std::string to_csv() const;
    nlohmann::json to_json() const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::vector<std::string> names_;
    std::vector<std::uint64_t> counts_;
};

// Labels are class indices into class_names. Throws on empty input, length
// mismatch, or an index outside the class list.
ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          std::vector<std::string> class_names);

struct BinaryMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

    nlohmann::json to_json() const;
};

double safe_ratio(double num, double den);
double f1_from(double precision, double recall);

BinaryMetrics binary_metrics(const ConfusionMatrix& cm, std::size_t positive_class);

std::vector<double> per_class_f1(const ConfusionMatrix& cm);

struct Averages {
    double macro = 0.0;
    double micro = 0.0;
};

Averages macro_micro(const std::vector<double>& f1, const std::vector<std::uint64_t>& supports);

// F1 from TP/FP/FN pooled over all classes.
double pooled_f1(const ConfusionMatrix& cm);

struct MulticlassReport {
    ConfusionMatrix confusion;
    std::vector<double> per_class_f1;
    std::vector<std::uint64_t> supports;
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    double pooled_f1 = 0.0;
    double accuracy = 0.0;

    nlohmann::json to_json() const;
};

MulticlassReport multiclass_report(const ConfusionMatrix& cm);

}  // namespace nids
