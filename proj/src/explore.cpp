#include "nids/explore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nids/error.hpp"
#include "nids/preprocess.hpp"

namespace nids {

namespace {

std::string num(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::size_t require_feature(const std::string& name) {
    auto idx = feature_index(name);
    if (!idx) throw ConfigError("unknown feature '" + name + "'");
    return *idx;
}

}  // namespace

HistogramReport histogram(std::span<const double> values, std::span<const Category> categories,
                          const std::string& feature, std::size_t bins) {
    if (values.empty()) throw DataError("histogram: empty dataset");
    if (values.size() != categories.size()) throw DataError("histogram: categories not aligned");
    if (bins == 0) throw ConfigError("histogram: bins must be >= 1");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it;
    double hi = *hi_it;
    HistogramReport h;
    h.feature = feature;
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
        bins = 1;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + width * static_cast<double>(b));
    h.counts.assign(kNumCategories, std::vector<std::size_t>(bins, 0));
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto b = static_cast<std::size_t>((values[i] - lo) / width);
        b = std::min(b, bins - 1);
        // Guard against rounding at interior edges.
        while (b > 0 && values[i] < h.edges[b]) --b;
        while (b + 1 < bins && values[i] >= h.edges[b + 1]) ++b;
        ++h.counts[static_cast<std::size_t>(categories[i])][b];
    }
    return h;
}

std::string HistogramReport::to_csv() const {
    std::ostringstream out;
    out << "edge_low,edge_high";
    for (std::size_t c = 0; c < kNumCategories; ++c) out << ',' << category_name(static_cast<Category>(c));
    out << '\n';
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        out << num(edges[b]) << ',' << num(edges[b + 1]);
        for (std::size_t c = 0; c < kNumCategories; ++c) out << ',' << counts[c][b];
        out << '\n';
    }
    return out.str();
}

CorrelationMatrix pearson_matrix(const Matrix& m, std::vector<std::string> names) {
    if (m.rows() < 2) throw DataError("pearson_matrix: need at least 2 rows");
    if (names.size() != m.cols()) throw DataError("pearson_matrix: one name per column required");
    const std::size_t k = m.cols();
    const auto n = static_cast<double>(m.rows());
    std::vector<double> mean(k, 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < k; ++c) mean[c] += m(r, c);
    }
    for (auto& v : mean) v /= n;

    CorrelationMatrix cm;
    cm.names = std::move(names);
    cm.constant.assign(k, false);
    for (std::size_t c = 0; c < k; ++c) {
        bool same = true;
        for (std::size_t r = 1; r < m.rows() && same; ++r) same = m(r, c) == m(0, c);
        cm.constant[c] = same;
    }
    std::vector<std::vector<double>> cov(k, std::vector<double>(k, 0.0));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            const double di = m(r, i) - mean[i];
            if (di == 0.0) continue;
            for (std::size_t j = i; j < k; ++j) cov[i][j] += di * (m(r, j) - mean[j]);
        }
    }
    cm.r.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            double v = 0.0;
            if (!cm.constant[i] && !cm.constant[j]) {
                v = i == j ? 1.0 : std::clamp(cov[i][j] / std::sqrt(cov[i][i] * cov[j][j]), -1.0, 1.0);
            }
            cm.r[i][j] = v;
            cm.r[j][i] = v;
        }
    }
    return cm;
}

std::string CorrelationMatrix::to_csv() const {
    std::ostringstream out;
    out << "feature";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << names[i];
        for (std::size_t j = 0; j < names.size(); ++j) out << ',' << (defined(i, j) ? num(r[i][j]) : "");
        out << '\n';
    }
    return out.str();
}

RedundancyReport find_constant_features(const Matrix& m, const std::vector<std::string>& names) {
    if (m.rows() == 0) throw DataError("find_constant_features: empty dataset");
    RedundancyReport rep;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        bool same = true;
        for (std::size_t r = 1; r < m.rows() && same; ++r) same = m(r, c) == m(0, c);
        if (same) rep.constant_features.push_back({names.at(c), m(0, c)});
    }
    return rep;
}

nlohmann::json RedundancyReport::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& f : constant_features) list.push_back({{"feature", f.name}, {"value", f.value}});
    return {{"constant_features", list}};
}

std::string scatter_csv(std::span<const double> x, std::span<const double> y, std::span<const Category> categories,
                        const std::string& x_name, const std::string& y_name) {
    if (x.size() != y.size() || x.size() != categories.size()) throw DataError("scatter: columns not aligned");
    std::string out = x_name + "," + y_name + ",category\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out += num(x[i]);
        out += ',';
        out += num(y[i]);
        out += ',';
        out += category_name(categories[i]);
        out += '\n';
    }
    return out;
}

std::vector<ScatterRow> parse_scatter_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    std::vector<ScatterRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        if (a == std::string::npos || b == std::string::npos) throw DataError("scatter csv: malformed line");
        ScatterRow r;
        std::from_chars(line.data(), line.data() + a, r.x);
        std::from_chars(line.data() + a + 1, line.data() + b, r.y);
        r.category = line.substr(b + 1);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<std::pair<std::string, std::string>> default_scatter_pairs() {
    return {{"diff_srv_rate", "rerror_rate"},
            {"dst_host_srv_diff_host_rate", "dst_host_diff_srv_rate"},
            {"serror_rate", "count"}};
}

void write_exploration(const LabeledDataset& ds, const AttackTaxonomy& taxonomy, const std::filesystem::path& out_dir,
                       const ExploreOptions& options) {
    if (ds.records.empty()) throw DataError("explore: empty dataset");
    const auto categories = categorize_all(ds, taxonomy);
    const Matrix encoded = encode(fit_encoder(ds), ds);
    std::vector<std::string> names;
    for (const auto& f : feature_schema()) names.emplace_back(f.name);

    std::filesystem::create_directories(out_dir / "histograms");
    auto hist_features = options.histogram_features;
    if (hist_features.empty()) hist_features = names;
    std::vector<double> column(encoded.rows());
    for (const auto& name : hist_features) {
        const auto f = require_feature(name);
        for (std::size_t r = 0; r < encoded.rows(); ++r) column[r] = encoded(r, f);
        write_text(out_dir / "histograms" / (name + ".csv"), histogram(column, categories, name, options.bins).to_csv());
    }

    write_text(out_dir / "correlation.csv", pearson_matrix(encoded, names).to_csv());

    auto pairs = options.scatter_pairs;
    if (pairs.empty()) pairs = default_scatter_pairs();
    std::vector<double> xs(encoded.rows()), ys(encoded.rows());
    for (const auto& [fx, fy] : pairs) {
        const auto ix = require_feature(fx);
        const auto iy = require_feature(fy);
        for (std::size_t r = 0; r < encoded.rows(); ++r) {
            xs[r] = encoded(r, ix);
            ys[r] = encoded(r, iy);
        }
        write_text(out_dir / ("scatter_" + fx + "_" + fy + ".csv"), scatter_csv(xs, ys, categories, fx, fy));
    }

    write_text(out_dir / "redundancy.json", find_constant_features(encoded, names).to_json().dump(2) + "\n");
}

}  // namespace nids
