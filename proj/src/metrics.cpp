#include "nids/metrics.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nids/error.hpp"

namespace nids {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : names_(std::move(class_names)), counts_(names_.size() * names_.size(), 0) {}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < size(); ++i) t += at(i, i);
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < size(); ++j) s += at(truth, j);
    return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < size(); ++i) s += at(i, predicted);
    return s;
}

std::string ConfusionMatrix::to_csv() const {
    std::ostringstream out;
    out << "true\\predicted";
    for (const auto& n : names_) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < size(); ++i) {
        out << names_[i];
        for (std::size_t j = 0; j < size(); ++j) out << ',' << at(i, j);
        out << '\n';
    }
    return out.str();
}

nlohmann::json ConfusionMatrix::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < size(); ++i) {
        std::vector<std::uint64_t> r(counts_.begin() + static_cast<std::ptrdiff_t>(i * size()),
                                     counts_.begin() + static_cast<std::ptrdiff_t>((i + 1) * size()));
        rows.push_back(r);
    }
    return {{"classes", names_}, {"counts", rows}};
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          std::vector<std::string> class_names) {
    if (truth.empty()) throw DataError("confusion: empty input");
    if (truth.size() != predicted.size()) throw DataError("confusion: truth/prediction length mismatch");
    ConfusionMatrix cm(std::move(class_names));
    const auto k = static_cast<int>(cm.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= k || predicted[i] < 0 || predicted[i] >= k)
            throw DataError("confusion: label outside class list at position " + std::to_string(i));
        ++cm.at(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
    }
    return cm;
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_from(double precision, double recall) {
    return safe_ratio(2.0 * precision * recall, precision + recall);
}

nlohmann::json BinaryMetrics::to_json() const {
    return {{"accuracy", accuracy}, {"precision", precision}, {"recall", recall}, {"f1", f1},
            {"tp", tp},             {"tn", tn},               {"fp", fp},         {"fn", fn}};
}

BinaryMetrics binary_metrics(const ConfusionMatrix& cm, std::size_t positive_class) {
    if (cm.size() != 2) throw std::invalid_argument("binary_metrics: need a 2x2 confusion matrix");
    if (positive_class > 1) throw std::invalid_argument("binary_metrics: positive class must be 0 or 1");
    const std::size_t p = positive_class;
    const std::size_t n = 1 - positive_class;
    BinaryMetrics m;
    m.tp = cm.at(p, p);
    m.fn = cm.at(p, n);
    m.fp = cm.at(n, p);
    m.tn = cm.at(n, n);
    m.accuracy = safe_ratio(static_cast<double>(m.tp + m.tn), static_cast<double>(cm.total()));
    m.precision = safe_ratio(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fp));
    m.recall = safe_ratio(static_cast<double>(m.tp), static_cast<double>(m.tp + m.fn));
    m.f1 = f1_from(m.precision, m.recall);
    return m;
}

std::vector<double> per_class_f1(const ConfusionMatrix& cm) {
    std::vector<double> out;
    out.reserve(cm.size());
    for (std::size_t c = 0; c < cm.size(); ++c) {
        const auto tp = static_cast<double>(cm.at(c, c));
        const double precision = safe_ratio(tp, static_cast<double>(cm.col_sum(c)));
        const double recall = safe_ratio(tp, static_cast<double>(cm.row_sum(c)));
        out.push_back(f1_from(precision, recall));
    }
    return out;
}

Averages macro_micro(const std::vector<double>& f1, const std::vector<std::uint64_t>& supports) {
    if (f1.size() != supports.size() || f1.empty()) throw std::invalid_argument("macro_micro: misaligned inputs");
    const auto total = std::accumulate(supports.begin(), supports.end(), std::uint64_t{0});
    if (total == 0) throw DataError("macro_micro: zero total support");
    Averages a;
    double weighted = 0.0;
    for (std::size_t c = 0; c < f1.size(); ++c) {
        a.macro += f1[c];
        weighted += static_cast<double>(supports[c]) * f1[c];
    }
    a.macro /= static_cast<double>(f1.size());
    a.micro = weighted / static_cast<double>(total);
    return a;
}

double pooled_f1(const ConfusionMatrix& cm) {
    // Pooled over one-vs-all reductions: sum TP = trace, sum FP = sum FN = total - trace.
    const auto tp = static_cast<double>(cm.trace());
    const auto off = static_cast<double>(cm.total() - cm.trace());
    const double precision = safe_ratio(tp, tp + off);
    const double recall = safe_ratio(tp, tp + off);
    return f1_from(precision, recall);
}

MulticlassReport multiclass_report(const ConfusionMatrix& cm) {
    MulticlassReport r;
    r.confusion = cm;
    r.per_class_f1 = per_class_f1(cm);
    for (std::size_t c = 0; c < cm.size(); ++c) r.supports.push_back(cm.row_sum(c));
    const auto avg = macro_micro(r.per_class_f1, r.supports);
    r.macro_f1 = avg.macro;
    r.micro_f1 = avg.micro;
    r.pooled_f1 = pooled_f1(cm);
    r.accuracy = safe_ratio(static_cast<double>(cm.trace()), static_cast<double>(cm.total()));
    return r;
}

nlohmann::json MulticlassReport::to_json() const {
    nlohmann::json f1 = nlohmann::json::object();
    nlohmann::json support = nlohmann::json::object();
    for (std::size_t c = 0; c < per_class_f1.size(); ++c) {
        f1[confusion.class_names()[c]] = per_class_f1[c];
        support[confusion.class_names()[c]] = supports[c];
    }
    return {{"confusion", confusion.to_json()}, {"per_class_f1", f1}, {"support", support},
            {"macro_f1", macro_f1},             {"micro_f1", micro_f1}, {"pooled_f1", pooled_f1},
            {"accuracy", accuracy}};
}

}  // namespace nids
