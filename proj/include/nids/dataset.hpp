#pragma once

// NSL-KDD ingestion: the 41-feature schema, record parsing/serialization,
// and the attack-name -> category taxonomy.
//
// Record layout (43 comma-separated fields, no header):
//   41 features | label | difficulty
// Feature order follows the canonical NSL-KDD dump; 1-based feature 20 is
// num_outbound_cmds.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nids/error.hpp"

namespace nids {

inline constexpr std::size_t kNumFeatures = 41;
inline constexpr std::size_t kNumFields = 43;

enum class FeatureKind { Continuous, Categorical, Binary };
enum class FeatureGroup { Basic, Content, Traffic };

struct FeatureSpec {
    std::size_t index;  // 0-based
    std::string_view name;
    FeatureKind kind;
    FeatureGroup group;
};

using FeatureSchema = std::array<FeatureSpec, kNumFeatures>;

const FeatureSchema& feature_schema();
std::optional<std::size_t> feature_index(std::string_view name);

// Indices of protocol_type, service, flag.
inline constexpr std::array<std::size_t, 3> kCategoricalFeatures = {1, 2, 3};

enum class Category { Normal = 0, DoS = 1, Probe = 2, R2L = 3, U2R = 4 };
inline constexpr std::size_t kNumCategories = 5;

std::string_view category_name(Category c);
Category parse_category(std::string_view name);

struct ConnectionRecord {
    // Numeric value per feature; 0 for the categorical slots.
    std::array<double, kNumFeatures> values{};
    // Digits after the decimal point as written in the source, so that
    // serialization reproduces the original token.
    std::array<std::uint8_t, kNumFeatures> decimals{};
    // protocol_type, service, flag
    std::array<std::string, 3> categorical;
    std::string label;
    int difficulty = 0;

    const std::string& categorical_value(std::size_t feature) const;
    bool operator==(const ConnectionRecord&) const = default;
};

enum class Split { Train, Test, Fixture };

std::string_view split_name(Split s);

struct LabeledDataset {
    std::vector<ConnectionRecord> records;
    Split split = Split::Fixture;

    std::size_t size() const { return records.size(); }
};

class AttackTaxonomy {
public:
    AttackTaxonomy() = default;
    explicit AttackTaxonomy(std::map<std::string, Category, std::less<>> mapping);

    // Table-of-attacks mapping for the training set plus the test-only
    // attacks of KDDTest+.
    static AttackTaxonomy builtin();
    // `name,category` per line; '#' starts a comment.
    static AttackTaxonomy load(const std::filesystem::path& path);

    Category categorize(std::string_view label) const;
    bool contains(std::string_view label) const;
    const std::map<std::string, Category, std::less<>>& mapping() const { return mapping_; }

private:
    std::map<std::string, Category, std::less<>> mapping_;
};

// Parses a single 43-field line. `line_no` is used in error messages.
ConnectionRecord parse_record(std::string_view line, std::size_t line_no);
std::string format_record(const ConnectionRecord& rec);

LabeledDataset parse_kdd_stream(std::istream& in, Split split, const std::string& source = "<stream>");
LabeledDataset parse_kdd_file(const std::filesystem::path& path, Split split = Split::Train);
void write_kdd_stream(std::ostream& out, const LabeledDataset& ds);
void write_kdd_file(const std::filesystem::path& path, const LabeledDataset& ds);

std::vector<Category> categorize_all(const LabeledDataset& ds, const AttackTaxonomy& taxonomy);

// 0 = normal, 1 = attack.
std::vector<int> binary_labels(const LabeledDataset& ds, const AttackTaxonomy& taxonomy);

// 0 = DoS, 1 = Probe, 2 = R2L, 3 = U2R. Throws on Normal records.
std::vector<int> fourclass_labels(const LabeledDataset& ds, const AttackTaxonomy& taxonomy);

LabeledDataset filter_by_category(const LabeledDataset& ds, const AttackTaxonomy& taxonomy,
                                  bool keep_normal);

// Label counts keyed by raw label string.
std::map<std::string, std::size_t> label_census(const LabeledDataset& ds);

// Deterministic synthetic data: n_per_class records for each of the five
// categories, drawn from well-separated Gaussian blobs.
LabeledDataset make_fixture(std::size_t n_per_class, std::uint64_t seed);

}  // namespace nids
