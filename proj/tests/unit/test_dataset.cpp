#include <doctest.h>

#include <sstream>

#include "nids/dataset.hpp"
#include "nids/error.hpp"

using namespace nids;

namespace {

const std::string kLine =
    "0,tcp,ftp_data,SF,491,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,2,2,0.00,0.00,0.00,0.00,1.00,0.00,0.00,150,25,0.17,0.03,"
    "0.17,0.00,0.00,0.00,0.05,0.00,normal,20";

std::string with_label(const std::string& label) {
    auto line = kLine;
    line.replace(line.find("normal"), 6, label);
    return line;
}

}  // namespace

TEST_CASE("schema has 41 features in three groups") {
    const auto& s = feature_schema();
    CHECK(s.size() == 41);
    std::size_t basic = 0, content = 0, traffic = 0, categorical = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i].index == i);
        basic += s[i].group == FeatureGroup::Basic;
        content += s[i].group == FeatureGroup::Content;
        traffic += s[i].group == FeatureGroup::Traffic;
        categorical += s[i].kind == FeatureKind::Categorical;
    }
    CHECK(basic == 9);
    CHECK(content == 13);
    CHECK(traffic == 19);
    CHECK(categorical == 3);
    CHECK(s[1].name == "protocol_type");
    CHECK(s[2].name == "service");
    CHECK(s[3].name == "flag");
    // 1-based feature 20 is the outbound-command count.
    CHECK(s[19].name == "num_outbound_cmds");
    CHECK(feature_index("num_outbound_cmds") == 19);
    CHECK_FALSE(feature_index("nope").has_value());
}

TEST_CASE("parse_record keeps label and difficulty") {
    const auto r = parse_record(with_label("neptune"), 1);
    CHECK(r.label == "neptune");
    CHECK(r.difficulty == 20);
    CHECK(r.categorical[0] == "tcp");
    CHECK(r.categorical_value(2) == "ftp_data");
    CHECK(r.values[4] == 491.0);
    CHECK(r.values[33] == doctest::Approx(0.17));
}

TEST_CASE("parse errors name the line") {
    std::istringstream in(kLine + "\n" + kLine.substr(0, kLine.rfind(',')) + "\n");
    try {
        parse_kdd_stream(in, Split::Fixture, "f.txt");
        FAIL("expected an error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("42") != std::string::npos);
    }
}

TEST_CASE("non-numeric or negative continuous fields are rejected") {
    auto bad = kLine;
    bad.replace(bad.find("491"), 3, "4x1");
    CHECK_THROWS_AS(parse_record(bad, 3), DataError);
    auto neg = kLine;
    neg.replace(neg.find("491"), 3, "-49");
    CHECK_THROWS_AS(parse_record(neg, 3), DataError);
    auto inf = kLine;
    inf.replace(inf.find("491"), 3, "inf");
    CHECK_THROWS_AS(parse_record(inf, 3), DataError);
    auto diff = kLine;
    diff.replace(diff.rfind("20"), 2, "22");
    CHECK_THROWS_AS(parse_record(diff, 3), DataError);
}

TEST_CASE("empty file is an error") {
    std::istringstream in("");
    CHECK_THROWS_AS(parse_kdd_stream(in, Split::Train), DataError);
}

TEST_CASE("serialization reproduces the source bytes") {
    std::istringstream in(kLine + "\n" + with_label("smurf") + "\n");
    const auto ds = parse_kdd_stream(in, Split::Fixture);
    std::ostringstream out;
    write_kdd_stream(out, ds);
    CHECK(out.str() == kLine + "\n" + with_label("smurf") + "\n");
}

TEST_CASE("taxonomy follows the attack table") {
    const auto tax = AttackTaxonomy::builtin();
    CHECK(tax.categorize("normal") == Category::Normal);
    CHECK(tax.categorize("neptune") == Category::DoS);
    CHECK(tax.categorize("guess_passwd") == Category::R2L);
    CHECK(tax.categorize("ipsweep") == Category::Probe);
    CHECK(tax.categorize("rootkit") == Category::U2R);
    const std::pair<const char*, Category> table[] = {
        {"back", Category::DoS},          {"land", Category::DoS},          {"pod", Category::DoS},
        {"smurf", Category::DoS},         {"teardrop", Category::DoS},      {"satan", Category::Probe},
        {"portsweep", Category::Probe},   {"nmap", Category::Probe},        {"warezclient", Category::R2L},
        {"warezmaster", Category::R2L},   {"imap", Category::R2L},          {"ftp_write", Category::R2L},
        {"multihop", Category::R2L},      {"phf", Category::R2L},           {"spy", Category::R2L},
        {"buffer_overflow", Category::U2R}, {"loadmodule", Category::U2R}, {"perl", Category::U2R}};
    for (const auto& [name, cat] : table) CHECK(tax.categorize(name) == cat);
    try {
        tax.categorize("zeroday");
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("zeroday") != std::string::npos);
    }
}

TEST_CASE("shipped taxonomy file matches the built-in mapping") {
    const auto file = AttackTaxonomy::load(NIDS_SOURCE_DIR "/data/taxonomy.txt");
    CHECK(file.mapping() == AttackTaxonomy::builtin().mapping());
}

TEST_CASE("binary and four-class labels") {
    const auto tax = AttackTaxonomy::builtin();
    LabeledDataset ds;
    for (const char* l : {"smurf", "nmap", "spy", "perl"}) ds.records.push_back(parse_record(with_label(l), 1));
    CHECK(fourclass_labels(ds, tax) == std::vector<int>{0, 1, 2, 3});
    CHECK(binary_labels(ds, tax) == std::vector<int>{1, 1, 1, 1});
    CHECK(fourclass_labels(LabeledDataset{}, tax).empty());

    ds.records.push_back(parse_record(kLine, 1));
    CHECK(binary_labels(ds, tax).back() == 0);
    CHECK_THROWS_AS(fourclass_labels(ds, tax), DataError);
    const auto attacks = filter_by_category(ds, tax, false);
    CHECK(attacks.size() == 4);
}

TEST_CASE("fixture is deterministic and round-trips") {
    const auto a = make_fixture(2, 7);
    const auto b = make_fixture(2, 7);
    std::ostringstream sa, sb;
    write_kdd_stream(sa, a);
    write_kdd_stream(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(make_fixture(5, 1).size() == 25);

    std::istringstream in(sa.str());
    const auto parsed = parse_kdd_stream(in, Split::Fixture);
    CHECK(parsed.records == a.records);
    const auto tax = AttackTaxonomy::builtin();
    const auto census = categorize_all(make_fixture(3, 2), tax);
    for (std::size_t c = 0; c < kNumCategories; ++c)
        CHECK(std::count(census.begin(), census.end(), static_cast<Category>(c)) == 3);
}
