// nids: two-stage network intrusion detection on NSL-KDD files.

#include <functional>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nids/app.hpp"
#include "nids/error.hpp"

namespace {

// Flag values; unset flags leave the config-file or default value in place.
struct Flags {
    std::optional<std::string> train, test, taxonomy, out, models, calibration, oversample;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> max_epochs, bins;
    std::optional<std::vector<std::string>> baselines;
    std::optional<std::string> config;
    bool drop_constant = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--train", f.train, "training file (43-field NSL-KDD format)");
    cmd->add_option("--test", f.test, "test file");
    cmd->add_option("--taxonomy", f.taxonomy, "attack taxonomy file (name,category per line)");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--max-epochs", f.max_epochs, "training epoch cap");
}

nids::RunConfig resolve(const Flags& f) {
    nids::RunConfig cfg;
    if (f.config) nids::apply_config_file(cfg, *f.config);
    if (f.train) cfg.train = *f.train;
    if (f.test) cfg.test = *f.test;
    if (f.taxonomy) cfg.taxonomy = *f.taxonomy;
    if (f.out) cfg.out = *f.out;
    if (f.models) cfg.models = *f.models;
    if (f.seed) cfg.seed = *f.seed;
    if (f.calibration) cfg.calibration = nids::parse_calibration(*f.calibration);
    if (f.oversample) cfg.oversample = nids::parse_oversample(*f.oversample);
    if (f.max_epochs) cfg.train_config.max_epochs = *f.max_epochs;
    if (f.bins) cfg.bins = *f.bins;
    if (f.baselines) cfg.baselines = *f.baselines;
    if (f.drop_constant) cfg.drop_constant = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical network intrusion detection (autoencoder + attack-type DNN)"};
    app.require_subcommand(1);
    Flags flags;
    std::function<void(const nids::RunConfig&)> action;

    auto* explore = app.add_subcommand("explore", "histograms, correlation, scatter and redundancy files");
    add_common(explore, flags);
    explore->add_option("--bins", flags.bins, "histogram bin count");
    explore->callback([&] { action = nids::cmd_explore; });

    auto* train_binary = app.add_subcommand("train-binary", "train and calibrate the stage-1 autoencoder");
    add_common(train_binary, flags);
    train_binary->add_option("--calibration", flags.calibration, "quantile:<q> or labeled-f1");
    train_binary->add_flag("--drop-constant", flags.drop_constant, "drop zero-variance columns");
    train_binary->callback([&] { action = nids::cmd_train_binary; });

    auto* train_multi = app.add_subcommand("train-multiclass", "train the stage-2 attack-type classifier");
    add_common(train_multi, flags);
    train_multi->add_option("--oversample", flags.oversample, "on, off or both");
    train_multi->add_flag("--drop-constant", flags.drop_constant, "drop zero-variance columns");
    train_multi->callback([&] { action = nids::cmd_train_multiclass; });

    auto* baselines = app.add_subcommand("baselines", "fit supervised binary baselines and write a results CSV");
    add_common(baselines, flags);
    baselines->add_option("--baselines", flags.baselines, "baseline names (default: all)")->delimiter(',');
    baselines->callback([&] { action = nids::cmd_baselines; });

    auto* evaluate = app.add_subcommand("evaluate", "run both stages on the test file");
    add_common(evaluate, flags);
    evaluate->add_option("--models", flags.models, "directory holding the model files (default: --out)");
    evaluate->callback([&] { action = nids::cmd_evaluate; });

    auto* pipeline = app.add_subcommand("pipeline", "train-binary, train-multiclass and evaluate");
    add_common(pipeline, flags);
    pipeline->add_option("--calibration", flags.calibration, "quantile:<q> or labeled-f1");
    pipeline->add_option("--oversample", flags.oversample, "on, off or both");
    pipeline->add_flag("--drop-constant", flags.drop_constant, "drop zero-variance columns");
    pipeline->callback([&] { action = nids::cmd_pipeline; });

    std::size_t fixture_n = 20;
    std::uint64_t fixture_seed = 0;
    std::string fixture_path;
    auto* fixture = app.add_subcommand("fixture", "write deterministic synthetic records");
    fixture->add_option("--n", fixture_n, "records per category");
    fixture->add_option("--seed", fixture_seed, "random seed");
    fixture->add_option("--out", fixture_path, "output file")->required();
    fixture->callback([&] { action = [&](const nids::RunConfig&) { nids::cmd_fixture(fixture_n, fixture_seed, fixture_path); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? nids::kExitOk : nids::kExitUsage;
    }

    try {
        action(resolve(flags));
        return nids::kExitOk;
    } catch (...) {
        return nids::exit_code_for_current_exception();
    }
}
