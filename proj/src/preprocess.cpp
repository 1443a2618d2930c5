#include "nids/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "nids/error.hpp"

namespace nids {

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> indices) const {
    FeatureMatrix out;
    out.values = values.select_rows(indices);
    out.labels.reserve(indices.size());
    for (auto i : indices) out.labels.push_back(labels.at(i));
    out.split = split;
    return out;
}

LabelCountEncoder::Table LabelCountEncoder::build_table(const std::map<std::string, std::size_t, std::less<>>& counts) {
    std::vector<std::pair<std::string, std::size_t>> order(counts.begin(), counts.end());
    // counts is name-ordered, so a stable sort on count keeps names ascending within ties.
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    Table table;
    int code = 1;
    for (const auto& [name, count] : order) table.emplace(name, Entry{count, code++});
    return table;
}

int LabelCountEncoder::code(std::size_t slot, std::string_view category) const {
    const auto& t = tables_.at(slot);
    auto it = t.find(category);
    return it == t.end() ? 0 : it->second.code;
}

LabelCountEncoder fit_encoder(const LabeledDataset& train) {
    if (train.records.empty()) throw DataError("fit_encoder: empty training set");
    std::array<std::map<std::string, std::size_t, std::less<>>, 3> counts;
    for (const auto& r : train.records) {
        for (std::size_t s = 0; s < 3; ++s) ++counts[s][r.categorical[s]];
    }
    LabelCountEncoder enc;
    for (std::size_t s = 0; s < 3; ++s) enc.tables()[s] = LabelCountEncoder::build_table(counts[s]);
    return enc;
}

Matrix encode(const LabelCountEncoder& enc, const LabeledDataset& ds) {
    Matrix m(ds.size(), kNumFeatures);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& r = ds.records[i];
        auto row = m.row(i);
        std::copy(r.values.begin(), r.values.end(), row.begin());
        for (std::size_t s = 0; s < 3; ++s) row[kCategoricalFeatures[s]] = enc.code(s, r.categorical[s]);
    }
    return m;
}

Standardizer fit_standardizer(const Matrix& m) {
    if (m.rows() == 0) throw DataError("fit_standardizer: no rows");
    const auto n = static_cast<double>(m.rows());
    Standardizer s;
    s.mean.assign(m.cols(), 0.0);
    s.stddev.assign(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            if (!std::isfinite(v)) throw DataError("fit_standardizer: non-finite value at row " + std::to_string(r));
            s.mean[c] += v;
        }
    }
    for (auto& mu : s.mean) mu /= n;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const double d = m(r, c) - s.mean[c];
            s.stddev[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < m.cols(); ++c) {
        // Columns whose values are all identical get exactly zero spread.
        bool constant = true;
        for (std::size_t r = 1; r < m.rows() && constant; ++r) constant = m(r, c) == m(0, c);
        if (constant) {
            s.mean[c] = m(0, c);
            s.stddev[c] = 0.0;
        } else {
            s.stddev[c] = std::sqrt(s.stddev[c] / n);
        }
    }
    return s;
}

Matrix standardize(const Standardizer& s, const Matrix& m) {
    if (m.cols() != s.mean.size())
        throw DataError("standardize: matrix has " + std::to_string(m.cols()) + " columns, standardizer expects " +
                        std::to_string(s.mean.size()));
    Matrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out(r, c) = s.stddev[c] > 0.0 ? (m(r, c) - s.mean[c]) / s.stddev[c] : 0.0;
        }
    }
    return out;
}

FittedPipeline FittedPipeline::fit(const LabeledDataset& train, bool drop_constant) {
    FittedPipeline p;
    p.encoder_ = fit_encoder(train);
    p.standardizer_ = fit_standardizer(encode(p.encoder_, train));
    for (std::size_t c = 0; c < kNumFeatures; ++c) {
        if (!drop_constant || p.standardizer_.stddev[c] > 0.0) p.kept_columns_.push_back(c);
    }
    return p;
}

Matrix FittedPipeline::transform_values(const LabeledDataset& ds) const {
    Matrix z = standardize(standardizer_, encode(encoder_, ds));
    if (kept_columns_.size() == kNumFeatures) return z;
    Matrix out(z.rows(), kept_columns_.size());
    for (std::size_t r = 0; r < z.rows(); ++r) {
        for (std::size_t k = 0; k < kept_columns_.size(); ++k) out(r, k) = z(r, kept_columns_[k]);
    }
    return out;
}

FeatureMatrix FittedPipeline::transform(const LabeledDataset& ds, std::vector<int> labels) const {
    if (labels.size() != ds.size()) throw DataError("transform: label count does not match record count");
    FeatureMatrix fm;
    fm.values = transform_values(ds);
    fm.labels = std::move(labels);
    fm.split = ds.split;
    return fm;
}

nlohmann::json FittedPipeline::to_json() const {
    using nlohmann::json;
    json features = json::array();
    const auto& schema = feature_schema();
    for (std::size_t c = 0; c < kNumFeatures; ++c) {
        features.push_back({{"name", schema[c].name}, {"mu", standardizer_.mean[c]}, {"sigma", standardizer_.stddev[c]}});
    }
    json categorical = json::object();
    for (std::size_t s = 0; s < 3; ++s) {
        json table = json::object();
        for (const auto& [name, e] : encoder_.tables()[s]) table[name] = {e.count, e.code};
        categorical[std::string(schema[kCategoricalFeatures[s]].name)] = table;
    }
    return {{"format_version", kFormatVersion},
            {"kind", "pipeline"},
            {"features", features},
            {"categorical", categorical},
            {"kept_columns", kept_columns_}};
}

FittedPipeline FittedPipeline::from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "pipeline") throw FormatError("not a pipeline document");
    if (j.value("format_version", -1) != kFormatVersion)
        throw FormatError("pipeline format_version " + j.value("format_version", nlohmann::json(-1)).dump() +
                          " unsupported (expected " + std::to_string(kFormatVersion) + ")");
    FittedPipeline p;
    const auto& schema = feature_schema();
    const auto& features = j.at("features");
    if (features.size() != kNumFeatures) throw FormatError("pipeline must list 41 features");
    for (std::size_t c = 0; c < kNumFeatures; ++c) {
        if (features[c].at("name").get<std::string>() != schema[c].name)
            throw FormatError("pipeline feature " + std::to_string(c) + " name mismatch");
        p.standardizer_.mean.push_back(features[c].at("mu").get<double>());
        p.standardizer_.stddev.push_back(features[c].at("sigma").get<double>());
    }
    for (std::size_t s = 0; s < 3; ++s) {
        const auto& table = j.at("categorical").at(std::string(schema[kCategoricalFeatures[s]].name));
        for (const auto& [name, pair] : table.items()) {
            p.encoder_.tables()[s].emplace(name, LabelCountEncoder::Entry{pair.at(0).get<std::size_t>(),
                                                                          pair.at(1).get<int>()});
        }
    }
    p.kept_columns_ = j.at("kept_columns").get<std::vector<std::size_t>>();
    return p;
}

}  // namespace nids
