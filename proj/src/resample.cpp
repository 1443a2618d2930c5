#include "nids/resample.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "nids/dataset.hpp"
#include "nids/error.hpp"

namespace nids {

std::vector<std::size_t> knn(std::span<const double> query, const Matrix& pool, std::size_t k,
                             std::optional<std::size_t> exclude) {
    const std::size_t available = pool.rows() - (exclude && *exclude < pool.rows() ? 1 : 0);
    if (k == 0 || available < k)
        throw DataError("knn: pool has " + std::to_string(available) + " candidates, need " + std::to_string(k));
    if (query.size() != pool.cols()) throw DataError("knn: query width mismatch");
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(available);
    for (std::size_t i = 0; i < pool.rows(); ++i) {
        if (exclude && *exclude == i) continue;
        dist.emplace_back(squared_distance(query, pool.row(i)), i);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

Matrix smote_generate(const Matrix& minority, long long n_new, const SmoteConfig& cfg, const LambdaSource& lambda) {
    if (n_new < 0) throw DataError("smote_generate: n_new must be >= 0");
    Matrix out(0, minority.cols());
    if (n_new == 0) return out;
    if (minority.rows() < 2) throw DataError("smote_generate: need at least 2 minority rows to interpolate");
    if (cfg.k_neighbors == 0) throw ConfigError("smote: k_neighbors must be >= 1");
    const std::size_t k = std::min(cfg.k_neighbors, minority.rows() - 1);

    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::vector<std::vector<std::size_t>> neighbours(minority.rows());
    std::vector<double> s(minority.cols());
    for (long long j = 0; j < n_new; ++j) {
        const auto a = static_cast<std::size_t>(j) % minority.rows();
        if (neighbours[a].empty()) neighbours[a] = knn(minority.row(a), minority, k, a);
        const auto b = neighbours[a][pick(rng)];
        const double lam = lambda ? lambda() : unit(rng);
        const auto ra = minority.row(a);
        const auto rb = minority.row(b);
        for (std::size_t c = 0; c < s.size(); ++c) s[c] = ra[c] + lam * (rb[c] - ra[c]);
        out.append_row(s);
    }
    return out;
}

void SvmSmoteConfig::validate() const {
    if (smote.k_neighbors == 0) throw ConfigError("svm-smote: k_neighbors must be >= 1");
    if (m_neighbors < smote.k_neighbors) throw ConfigError("svm-smote: m_neighbors must be >= k_neighbors");
    if (!(out_step > 0.0 && out_step <= 1.0)) throw ConfigError("svm-smote: out_step must be in (0, 1]");
}

std::map<int, std::size_t> balance_targets(const std::vector<int>& labels) {
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    std::size_t peak = 0;
    for (const auto& [c, n] : counts) peak = std::max(peak, n);
    for (auto& [c, n] : counts) n = peak;
    return counts;
}

namespace {

// Synthetic rows for one minority class.
Matrix oversample_class(const FeatureMatrix& data, int cls, std::size_t n_new, const SvmSmoteConfig& cfg,
                        std::uint64_t seed, std::vector<std::string>& log) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (data.labels[i] == cls) members.push_back(i);
    }
    const Matrix minority = data.values.select_rows(members);
    if (minority.rows() < 2) throw DataError("svm-smote: class " + std::to_string(cls) + " has fewer than 2 rows");

    std::vector<int> signs(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) signs[i] = data.labels[i] == cls ? 1 : -1;
    auto svm_cfg = cfg.svm;
    svm_cfg.seed = seed;
    const auto svm = fit_linear_svm(data.values, signs, svm_cfg);

    // Seeds: minority margin violators, as positions within `minority`.
    std::vector<std::size_t> seeds;
    {
        std::size_t pos = 0;
        for (auto v : svm.margin_violators) {
            while (pos < members.size() && members[pos] < v) ++pos;
            if (pos < members.size() && members[pos] == v) seeds.push_back(pos);
        }
    }

    SmoteConfig smote = cfg.smote;
    smote.seed = seed;
    if (seeds.empty()) {
        log.push_back("class " + std::to_string(cls) + ": no margin violators, plain SMOTE over " +
                      std::to_string(minority.rows()) + " rows");
        return smote_generate(minority, static_cast<long long>(n_new), smote);
    }

    const std::size_t k = std::min(cfg.smote.k_neighbors, minority.rows() - 1);
    const std::size_t m = std::min(cfg.m_neighbors, data.rows() - 1);
    std::vector<bool> danger(seeds.size());
    std::size_t n_danger = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const auto row = members[seeds[s]];
        const auto nn = knn(data.values.row(row), data.values, m, row);
        const auto majority = std::count_if(nn.begin(), nn.end(), [&](std::size_t i) { return data.labels[i] != cls; });
        danger[s] = 2 * static_cast<std::size_t>(majority) > m;
        n_danger += danger[s] ? 1 : 0;
    }
    log.push_back("class " + std::to_string(cls) + ": " + std::to_string(seeds.size()) + " margin-violator seeds (" +
                  std::to_string(n_danger) + " interpolate, " + std::to_string(seeds.size() - n_danger) +
                  " extrapolate), " + std::to_string(n_new) + " synthetic rows");

    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::vector<std::vector<std::size_t>> neighbours(seeds.size());
    Matrix out(0, data.values.cols());
    std::vector<double> s(data.values.cols());
    for (std::size_t j = 0; j < n_new; ++j) {
        const auto si = j % seeds.size();
        const auto a = seeds[si];
        if (neighbours[si].empty()) neighbours[si] = knn(minority.row(a), minority, k, a);
        const auto b = neighbours[si][pick(rng)];
        const double lam = unit(rng);
        const auto ra = minority.row(a);
        const auto rb = minority.row(b);
        if (danger[si]) {
            for (std::size_t c = 0; c < s.size(); ++c) s[c] = ra[c] + lam * (rb[c] - ra[c]);
        } else {
            for (std::size_t c = 0; c < s.size(); ++c) s[c] = ra[c] + lam * cfg.out_step * (ra[c] - rb[c]);
        }
        out.append_row(s);
    }
    return out;
}

}  // namespace

ResampledSet svm_smote(const FeatureMatrix& data, const SvmSmoteConfig& cfg) {
    cfg.validate();
    if (data.rows() != data.labels.size()) throw DataError("svm_smote: labels not aligned");
    std::map<int, std::size_t> counts;
    for (int l : data.labels) ++counts[l];
    if (counts.size() < 2) throw DataError("svm_smote: need at least two classes");

    const auto targets = cfg.smote.target_counts.empty() ? balance_targets(data.labels) : cfg.smote.target_counts;
    for (const auto& [cls, target] : targets) {
        const auto have = counts.contains(cls) ? counts.at(cls) : 0;
        if (target < have)
            throw ConfigError("svm_smote: target for class " + std::to_string(cls) + " is below its current count");
        if (have == 0 && target > 0) throw DataError("svm_smote: class " + std::to_string(cls) + " has no rows");
    }

    ResampledSet result;
    result.matrix = data;
    result.synthetic_mask.assign(data.rows(), false);
    for (const auto& [cls, target] : targets) {
        const auto n_new = target - counts.at(cls);
        if (n_new == 0) continue;
        const auto seed = cfg.smote.seed * 1000003ULL + static_cast<std::uint64_t>(cls) + 1;
        const Matrix synth = oversample_class(data, cls, n_new, cfg, seed, result.log);
        for (std::size_t r = 0; r < synth.rows(); ++r) {
            result.matrix.values.append_row(synth.row(r));
            result.matrix.labels.push_back(cls);
            result.synthetic_mask.push_back(true);
        }
        result.synthetic_counts[cls] = synth.rows();
    }
    return result;
}

void ResampledSet::write_kdd(std::ostream& out, const std::vector<std::string>& class_names) const {
    char buf[64];
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (double v : matrix.values.row(r)) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out.write(buf, ptr - buf);
            out << ',';
        }
        const auto label = static_cast<std::size_t>(matrix.labels[r]);
        const std::string name = label < class_names.size() ? class_names[label] : std::to_string(label);
        out << (synthetic_mask[r] ? "synthetic:" + name : name) << ",0\n";
    }
}

}  // namespace nids
