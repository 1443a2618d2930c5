#include "nids/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace nids {

namespace {

using K = FeatureKind;
using G = FeatureGroup;

constexpr FeatureSchema kSchema = {{
    {0, "duration", K::Continuous, G::Basic},
    {1, "protocol_type", K::Categorical, G::Basic},
    {2, "service", K::Categorical, G::Basic},
    {3, "flag", K::Categorical, G::Basic},
    {4, "src_bytes", K::Continuous, G::Basic},
    {5, "dst_bytes", K::Continuous, G::Basic},
    {6, "land", K::Binary, G::Basic},
    {7, "wrong_fragment", K::Continuous, G::Basic},
    {8, "urgent", K::Continuous, G::Basic},
    {9, "hot", K::Continuous, G::Content},
    {10, "num_failed_logins", K::Continuous, G::Content},
    {11, "logged_in", K::Binary, G::Content},
    {12, "num_compromised", K::Continuous, G::Content},
    {13, "root_shell", K::Binary, G::Content},
    {14, "su_attempted", K::Continuous, G::Content},
    {15, "num_root", K::Continuous, G::Content},
    {16, "num_file_creations", K::Continuous, G::Content},
    {17, "num_shells", K::Continuous, G::Content},
    {18, "num_access_files", K::Continuous, G::Content},
    {19, "num_outbound_cmds", K::Continuous, G::Content},
    {20, "is_host_login", K::Binary, G::Content},
    {21, "is_guest_login", K::Binary, G::Content},
    {22, "count", K::Continuous, G::Traffic},
    {23, "srv_count", K::Continuous, G::Traffic},
    {24, "serror_rate", K::Continuous, G::Traffic},
    {25, "srv_serror_rate", K::Continuous, G::Traffic},
    {26, "rerror_rate", K::Continuous, G::Traffic},
    {27, "srv_rerror_rate", K::Continuous, G::Traffic},
    {28, "same_srv_rate", K::Continuous, G::Traffic},
    {29, "diff_srv_rate", K::Continuous, G::Traffic},
    {30, "srv_diff_host_rate", K::Continuous, G::Traffic},
    {31, "dst_host_count", K::Continuous, G::Traffic},
    {32, "dst_host_srv_count", K::Continuous, G::Traffic},
    {33, "dst_host_same_srv_rate", K::Continuous, G::Traffic},
    {34, "dst_host_diff_srv_rate", K::Continuous, G::Traffic},
    {35, "dst_host_same_src_port_rate", K::Continuous, G::Traffic},
    {36, "dst_host_srv_diff_host_rate", K::Continuous, G::Traffic},
    {37, "dst_host_serror_rate", K::Continuous, G::Traffic},
    {38, "dst_host_srv_serror_rate", K::Continuous, G::Traffic},
    {39, "dst_host_rerror_rate", K::Continuous, G::Traffic},
    {40, "dst_host_srv_rerror_rate", K::Continuous, G::Traffic},
}};

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {"Normal", "DoS", "Probe", "R2L",
                                                                          "U2R"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

// Plain non-negative decimal: digits, optionally '.' followed by digits.
std::pair<double, std::uint8_t> parse_decimal(std::string_view tok, std::size_t line_no,
                                              std::string_view field) {
    const auto bad = [&] {
        return DataError(where(line_no) + "field '" + std::string(field) + "' is not a non-negative decimal: '" +
                         std::string(tok) + "'");
    };
    if (tok.empty()) throw bad();
    const auto dot = tok.find('.');
    const auto int_part = tok.substr(0, dot);
    if (int_part.empty() || !std::all_of(int_part.begin(), int_part.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw bad();
    std::size_t decimals = 0;
    if (dot != std::string_view::npos) {
        const auto frac = tok.substr(dot + 1);
        if (frac.empty() || !std::all_of(frac.begin(), frac.end(), [](char c) { return c >= '0' && c <= '9'; }))
            throw bad();
        decimals = frac.size();
    }
    if (decimals > 17) throw bad();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) throw bad();
    return {v, static_cast<std::uint8_t>(decimals)};
}

void append_decimal(std::string& out, double v, std::uint8_t decimals) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    if (ec != std::errc()) throw std::runtime_error("format_record: value does not fit");
    out.append(buf, ptr);
}

}  // namespace

const FeatureSchema& feature_schema() { return kSchema; }

std::optional<std::size_t> feature_index(std::string_view name) {
    for (const auto& f : kSchema) {
        if (f.name == name) return f.index;
    }
    return std::nullopt;
}

std::string_view category_name(Category c) { return kCategoryNames.at(static_cast<std::size_t>(c)); }

Category parse_category(std::string_view name) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == name) return static_cast<Category>(i);
    }
    throw DataError("unknown category '" + std::string(name) + "'");
}

std::string_view split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Fixture: return "fixture";
    }
    return "?";
}

const std::string& ConnectionRecord::categorical_value(std::size_t feature) const {
    for (std::size_t i = 0; i < kCategoricalFeatures.size(); ++i) {
        if (kCategoricalFeatures[i] == feature) return categorical[i];
    }
    throw std::out_of_range("feature " + std::to_string(feature) + " is not categorical");
}

// ---------------------------------------------------------------------------
// Taxonomy

AttackTaxonomy::AttackTaxonomy(std::map<std::string, Category, std::less<>> mapping) : mapping_(std::move(mapping)) {}

AttackTaxonomy AttackTaxonomy::builtin() {
    using C = Category;
    return AttackTaxonomy({
        {"normal", C::Normal},
        // training-set attacks
        {"back", C::DoS}, {"land", C::DoS}, {"neptune", C::DoS}, {"pod", C::DoS},
        {"smurf", C::DoS}, {"teardrop", C::DoS},
        {"ipsweep", C::Probe}, {"nmap", C::Probe}, {"portsweep", C::Probe}, {"satan", C::Probe},
        {"ftp_write", C::R2L}, {"guess_passwd", C::R2L}, {"imap", C::R2L}, {"multihop", C::R2L},
        {"phf", C::R2L}, {"spy", C::R2L}, {"warezclient", C::R2L}, {"warezmaster", C::R2L},
        {"buffer_overflow", C::U2R}, {"loadmodule", C::U2R}, {"perl", C::U2R}, {"rootkit", C::U2R},
        // test-only attacks
        {"apache2", C::DoS}, {"mailbomb", C::DoS}, {"processtable", C::DoS}, {"udpstorm", C::DoS},
        {"mscan", C::Probe}, {"saint", C::Probe},
        {"named", C::R2L}, {"sendmail", C::R2L}, {"snmpgetattack", C::R2L}, {"snmpguess", C::R2L},
        {"worm", C::R2L}, {"xlock", C::R2L}, {"xsnoop", C::R2L},
        {"httptunnel", C::U2R}, {"ps", C::U2R}, {"sqlattack", C::U2R}, {"xterm", C::U2R},
    });
}

AttackTaxonomy AttackTaxonomy::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open taxonomy file " + path.string());
    std::map<std::string, Category, std::less<>> mapping;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto comma = s.find(',');
        if (comma == std::string_view::npos)
            throw DataError(path.string() + ": " + where(line_no) + "expected 'name,category'");
        const auto name = trim(s.substr(0, comma));
        const auto cat = parse_category(trim(s.substr(comma + 1)));
        auto [it, inserted] = mapping.emplace(std::string(name), cat);
        if (!inserted && it->second != cat)
            throw DataError(path.string() + ": " + where(line_no) + "'" + std::string(name) +
                            "' mapped to two categories");
    }
    if (mapping.empty()) throw DataError("taxonomy file " + path.string() + " is empty");
    return AttackTaxonomy(std::move(mapping));
}

Category AttackTaxonomy::categorize(std::string_view label) const {
    auto it = mapping_.find(label);
    if (it == mapping_.end()) throw DataError("unknown attack label '" + std::string(label) + "'");
    return it->second;
}

bool AttackTaxonomy::contains(std::string_view label) const { return mapping_.contains(label); }

// ---------------------------------------------------------------------------
// Parsing

ConnectionRecord parse_record(std::string_view line, std::size_t line_no) {
    line = trim(line);
    std::array<std::string_view, kNumFields> fields;
    std::size_t n = 0;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const auto tok = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (n < kNumFields) fields[n] = tok;
        ++n;
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (n != kNumFields) {
        throw DataError(where(line_no) + "expected " + std::to_string(kNumFields) + " fields, found " +
                        std::to_string(n));
    }

    ConnectionRecord rec;
    std::size_t cat = 0;
    for (const auto& spec : kSchema) {
        const auto tok = fields[spec.index];
        if (spec.kind == FeatureKind::Categorical) {
            if (tok.empty()) throw DataError(where(line_no) + "empty categorical field '" + std::string(spec.name) + "'");
            rec.categorical[cat++] = std::string(tok);
        } else {
            auto [v, d] = parse_decimal(tok, line_no, spec.name);
            rec.values[spec.index] = v;
            rec.decimals[spec.index] = d;
        }
    }
    if (fields[41].empty()) throw DataError(where(line_no) + "empty label");
    rec.label = std::string(fields[41]);

    const auto diff = fields[42];
    auto [ptr, ec] = std::from_chars(diff.data(), diff.data() + diff.size(), rec.difficulty);
    if (ec != std::errc() || ptr != diff.data() + diff.size() || rec.difficulty < 0 || rec.difficulty > 21)
        throw DataError(where(line_no) + "difficulty must be an integer in [0, 21], got '" + std::string(diff) + "'");
    return rec;
}

std::string format_record(const ConnectionRecord& rec) {
    std::string out;
    out.reserve(160);
    std::size_t cat = 0;
    for (const auto& spec : kSchema) {
        if (spec.kind == FeatureKind::Categorical) {
            out += rec.categorical[cat++];
        } else {
            append_decimal(out, rec.values[spec.index], rec.decimals[spec.index]);
        }
        out += ',';
    }
    out += rec.label;
    out += ',';
    out += std::to_string(rec.difficulty);
    return out;
}

LabeledDataset parse_kdd_stream(std::istream& in, Split split, const std::string& source) {
    LabeledDataset ds;
    ds.split = split;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            ds.records.push_back(parse_record(line, line_no));
        } catch (const DataError& e) {
            throw DataError(source + ": " + e.what());
        }
    }
    if (ds.records.empty()) throw DataError(source + ": no records");
    return ds;
}

LabeledDataset parse_kdd_file(const std::filesystem::path& path, Split split) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_kdd_stream(in, split, path.string());
}

void write_kdd_stream(std::ostream& out, const LabeledDataset& ds) {
    for (const auto& r : ds.records) out << format_record(r) << '\n';
}

void write_kdd_file(const std::filesystem::path& path, const LabeledDataset& ds) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_kdd_stream(out, ds);
}

// ---------------------------------------------------------------------------
// Labels

std::vector<Category> categorize_all(const LabeledDataset& ds, const AttackTaxonomy& taxonomy) {
    std::vector<Category> out;
    out.reserve(ds.size());
    for (const auto& r : ds.records) out.push_back(taxonomy.categorize(r.label));
    return out;
}

std::vector<int> binary_labels(const LabeledDataset& ds, const AttackTaxonomy& taxonomy) {
    std::vector<int> out;
    out.reserve(ds.size());
    for (const auto& r : ds.records) out.push_back(taxonomy.categorize(r.label) == Category::Normal ? 0 : 1);
    return out;
}

std::vector<int> fourclass_labels(const LabeledDataset& ds, const AttackTaxonomy& taxonomy) {
    std::vector<int> out;
    out.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto c = taxonomy.categorize(ds.records[i].label);
        if (c == Category::Normal)
            throw DataError("record " + std::to_string(i) + " is normal; four-class labels need attacks only");
        out.push_back(static_cast<int>(c) - 1);
    }
    return out;
}

LabeledDataset filter_by_category(const LabeledDataset& ds, const AttackTaxonomy& taxonomy, bool keep_normal) {
    LabeledDataset out;
    out.split = ds.split;
    for (const auto& r : ds.records) {
        const bool normal = taxonomy.categorize(r.label) == Category::Normal;
        if (normal == keep_normal) out.records.push_back(r);
    }
    return out;
}

std::map<std::string, std::size_t> label_census(const LabeledDataset& ds) {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : ds.records) ++counts[r.label];
    return counts;
}

// ---------------------------------------------------------------------------
// Fixture

LabeledDataset make_fixture(std::size_t n_per_class, std::uint64_t seed) {
    static constexpr std::array<std::array<std::string_view, 4>, kNumCategories> kLabels = {{
        {"normal", "normal", "normal", "normal"},
        {"neptune", "smurf", "back", "teardrop"},
        {"satan", "ipsweep", "portsweep", "nmap"},
        {"warezclient", "guess_passwd", "warezmaster", "imap"},
        {"buffer_overflow", "rootkit", "loadmodule", "perl"},
    }};
    static constexpr std::array<std::string_view, 3> kProtocols = {"tcp", "udp", "icmp"};
    static constexpr std::array<std::string_view, 6> kServices = {"http", "private", "domain_u", "smtp", "ftp_data",
                                                                  "ecr_i"};
    static constexpr std::array<std::string_view, 4> kFlags = {"SF", "S0", "REJ", "RSTO"};

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::uniform_int_distribution<int> difficulty(0, 21);
    std::uniform_int_distribution<int> pick(0, 3);

    LabeledDataset ds;
    ds.split = Split::Fixture;
    ds.records.reserve(n_per_class * kNumCategories);
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        for (std::size_t i = 0; i < n_per_class; ++i) {
            ConnectionRecord rec;
            for (const auto& spec : kSchema) {
                const auto f = spec.index;
                if (spec.kind == FeatureKind::Categorical) continue;
                if (spec.name == "num_outbound_cmds") {
                    rec.values[f] = 0.0;
                    rec.decimals[f] = 0;
                } else if (spec.kind == FeatureKind::Binary) {
                    rec.values[f] = static_cast<double>((c + f) % 2);
                    rec.decimals[f] = 0;
                } else {
                    // (2c + 3f) mod 5 is a permutation of the classes for each feature.
                    const double centre = 2.0 + 4.0 * static_cast<double>((2 * c + 3 * f) % 5);
                    const double v = std::abs(centre + noise(rng));
                    rec.values[f] = std::round(v * 100.0) / 100.0;
                    rec.decimals[f] = 2;
                }
            }
            const auto jitter = static_cast<std::size_t>(pick(rng));
            rec.categorical[0] = std::string(kProtocols[(c + (jitter == 0 ? 1 : 0)) % kProtocols.size()]);
            rec.categorical[1] = std::string(kServices[(c + jitter / 2) % kServices.size()]);
            rec.categorical[2] = std::string(kFlags[c % kFlags.size()]);
            rec.label = std::string(kLabels[c][i % 4]);
            rec.difficulty = difficulty(rng);
            ds.records.push_back(std::move(rec));
        }
    }
    return ds;
}

}  // namespace nids
