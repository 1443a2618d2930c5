#include "nids/app.hpp"

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "nids/error.hpp"
#include "nids/explore.hpp"

namespace nids {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_file(const std::filesystem::path& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("missing required path: --") + what);
    if (!std::filesystem::is_regular_file(path))
        throw ConfigError(std::string(what) + " file not found: " + path.string());
}

AttackTaxonomy load_taxonomy(const RunConfig& cfg) {
    if (cfg.taxonomy.empty()) return AttackTaxonomy::builtin();
    require_file(cfg.taxonomy, "taxonomy");
    return AttackTaxonomy::load(cfg.taxonomy);
}

LabeledDataset load_split(const std::filesystem::path& path, const char* what, Split split) {
    require_file(path, what);
    log_line(std::string("reading ") + what + " data " + path.string());
    auto ds = parse_kdd_file(path, split);
    log_line("  " + std::to_string(ds.size()) + " records");
    return ds;
}

std::filesystem::path models_dir(const RunConfig& cfg) { return cfg.models.empty() ? cfg.out : cfg.models; }

void ensure_out(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec || !std::filesystem::is_directory(cfg.out))
        throw ConfigError("cannot create output directory " + cfg.out.string());
}

template <typename T>
void take(const nlohmann::json& j, const char* key, T& dst) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown config field '" + where + key + "'");
    }
}

const char* const kVariantPlain = "without_oversampling";
const char* const kVariantOversampled = "with_oversampling";

std::filesystem::path classifier_file(const std::filesystem::path& dir, const std::string& variant) {
    return dir / ("classifier_" + variant + ".json");
}

std::vector<int> verdict_labels(const std::vector<ScoredSample>& scores) {
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = static_cast<int>(scores[i].verdict);
    return out;
}

void check_baseline_names(const std::vector<std::string>& names) {
    for (const auto& n : names) {
        if (std::find(baseline_names().begin(), baseline_names().end(), n) == baseline_names().end()) {
            std::string valid;
            for (const auto& b : baseline_names()) valid += (valid.empty() ? "" : ", ") + b;
            throw ConfigError("unknown baseline '" + n + "' (valid: " + valid + ")");
        }
    }
}

}  // namespace

OversampleMode parse_oversample(const std::string& text) {
    if (text == "off") return OversampleMode::Off;
    if (text == "on") return OversampleMode::On;
    if (text == "both") return OversampleMode::Both;
    throw ConfigError("oversample must be on, off or both, got '" + text + "'");
}

std::string oversample_name(OversampleMode m) {
    switch (m) {
        case OversampleMode::Off: return "off";
        case OversampleMode::On: return "on";
        case OversampleMode::Both: return "both";
    }
    return "?";
}

nlohmann::json RunConfig::to_json() const {
    return {{"train", train.string()},
            {"test", test.string()},
            {"taxonomy", taxonomy.string()},
            {"out", out.string()},
            {"models", models.string()},
            {"seed", seed},
            {"calibration", calibration_name(calibration)},
            {"oversample", oversample_name(oversample)},
            {"smote",
             {{"k_neighbors", smote.smote.k_neighbors},
              {"m_neighbors", smote.m_neighbors},
              {"out_step", smote.out_step}}},
            {"train_config",
             {{"batch_size", train_config.batch_size},
              {"val_fraction", train_config.val_fraction},
              {"patience", train_config.patience},
              {"max_epochs", train_config.max_epochs},
              {"learning_rate", train_config.learning_rate}}},
            {"baselines", baselines},
            {"bins", bins},
            {"drop_constant", drop_constant}};
}

void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"train", "test", "taxonomy", "out", "models", "seed", "calibration", "oversample", "smote",
                    "train_config", "baselines", "bins", "drop_constant"},
                   "");
    std::string s;
    auto path_field = [&](const char* key, std::filesystem::path& dst) {
        if (!j.contains(key)) return;
        take(j, key, s);
        dst = s;
    };
    path_field("train", cfg.train);
    path_field("test", cfg.test);
    path_field("taxonomy", cfg.taxonomy);
    path_field("out", cfg.out);
    path_field("models", cfg.models);
    take(j, "seed", cfg.seed);
    if (j.contains("calibration")) {
        take(j, "calibration", s);
        cfg.calibration = parse_calibration(s);
    }
    if (j.contains("oversample")) {
        take(j, "oversample", s);
        cfg.oversample = parse_oversample(s);
    }
    if (j.contains("smote")) {
        const auto& sm = j.at("smote");
        if (!sm.is_object()) throw ConfigError("config field 'smote' must be an object");
        reject_unknown(sm, {"k_neighbors", "m_neighbors", "out_step"}, "smote.");
        take(sm, "k_neighbors", cfg.smote.smote.k_neighbors);
        take(sm, "m_neighbors", cfg.smote.m_neighbors);
        take(sm, "out_step", cfg.smote.out_step);
    }
    if (j.contains("train_config")) {
        const auto& tc = j.at("train_config");
        if (!tc.is_object()) throw ConfigError("config field 'train_config' must be an object");
        reject_unknown(tc, {"batch_size", "val_fraction", "patience", "max_epochs", "learning_rate"}, "train_config.");
        take(tc, "batch_size", cfg.train_config.batch_size);
        take(tc, "val_fraction", cfg.train_config.val_fraction);
        take(tc, "patience", cfg.train_config.patience);
        take(tc, "max_epochs", cfg.train_config.max_epochs);
        take(tc, "learning_rate", cfg.train_config.learning_rate);
    }
    take(j, "baselines", cfg.baselines);
    take(j, "bins", cfg.bins);
    take(j, "drop_constant", cfg.drop_constant);
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
    std::ifstream in(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    apply_config_json(cfg, j);
}

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const ConfigError& e) {
        log_line(std::string("error: ") + e.what());
        return kExitUsage;
    } catch (const DataError& e) {
        log_line(std::string("data error: ") + e.what());
        return kExitData;
    } catch (const FormatError& e) {
        log_line(std::string("format error: ") + e.what());
        return kExitData;
    } catch (const std::exception& e) {
        log_line(std::string("internal error: ") + e.what());
        return kExitInternal;
    } catch (...) {
        log_line("internal error: unknown exception");
        return kExitInternal;
    }
}

void log_line(const std::string& message) {
    static std::mutex mu;
    std::lock_guard lock(mu);
    std::cerr << "[nids] " << message << '\n';
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) throw ConfigError("file not found: " + path.string());
    std::ifstream in(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Stage 1

nlohmann::json BinaryTraining::to_json() const {
    return {{"calibration", calibration_name(detector.calibration())},
            {"alpha", detector.alpha()},
            {"normal_train_rows", normal_train_rows},
            {"holdout_rows", holdout_rows},
            {"history", history.to_json()}};
}

BinaryTraining train_binary(const LabeledDataset& train, const AttackTaxonomy& taxonomy, const RunConfig& cfg) {
    cfg.train_config.validate();
    BinaryTraining out;
    out.pipeline = FittedPipeline::fit(train, cfg.drop_constant);
    const FeatureMatrix all = out.pipeline.transform(train, binary_labels(train, taxonomy));

    auto tcfg = cfg.train_config;
    tcfg.seed = cfg.seed;
    const auto [tr, hold] = split_indices(all.rows(), tcfg.val_fraction, cfg.seed);
    std::vector<std::size_t> tr_normal, hold_normal;
    for (auto i : tr) {
        if (all.labels[i] == 0) tr_normal.push_back(i);
    }
    for (auto i : hold) {
        if (all.labels[i] == 0) hold_normal.push_back(i);
    }
    if (tr_normal.empty() || hold_normal.empty()) throw DataError("train-binary: not enough normal rows in training data");
    const FeatureMatrix normals = all.select(tr_normal);
    const FeatureMatrix holdout = all.select(hold);

    AutoencoderConfig ae;
    ae.input_dim = out.pipeline.output_width();
    log_line("training autoencoder on " + std::to_string(normals.rows()) + " normal rows");
    auto trained = train_on_normal(normals, all.select(hold_normal), ae, tcfg);
    log_line("  best epoch " + std::to_string(trained.history.best_epoch) + " of " +
             std::to_string(trained.history.val_loss.size()));

    const double alpha = calibrate_threshold(trained.model, holdout, cfg.calibration);
    log_line("calibrated alpha=" + std::to_string(alpha) + " (" + calibration_name(cfg.calibration) + ")");
    out.detector = AnomalyDetector(std::move(trained.model), alpha, cfg.calibration);
    out.history = std::move(trained.history);
    out.normal_train_rows = normals.rows();
    out.holdout_rows = holdout.rows();
    return out;
}

nlohmann::json BinaryEvaluation::to_json() const {
    return {{"confusion", confusion.to_json()},
            {"attack_positive", attack_positive.to_json()},
            {"normal_positive", normal_positive.to_json()}};
}

BinaryEvaluation evaluate_binary(const AnomalyDetector& detector, const FeatureMatrix& test) {
    BinaryEvaluation ev;
    ev.scores = detector.detect(test.values);
    ev.confusion = confusion(test.labels, verdict_labels(ev.scores), {"normal", "attack"});
    ev.attack_positive = binary_metrics(ev.confusion, 1);
    ev.normal_positive = binary_metrics(ev.confusion, 0);
    return ev;
}

std::string scores_csv(const std::vector<ScoredSample>& scores) {
    std::ostringstream out;
    out.precision(17);
    out << "row_index,reconstruction_error,verdict\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out << i << ',' << scores[i].reconstruction_error << ','
            << (scores[i].verdict == Verdict::Attack ? "attack" : "normal") << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Stage 2

FeatureMatrix attack_matrix(const FittedPipeline& pipeline, const LabeledDataset& ds, const AttackTaxonomy& taxonomy) {
    const auto attacks = filter_by_category(ds, taxonomy, false);
    if (attacks.records.empty()) throw DataError("no attack records in " + std::string(split_name(ds.split)) + " data");
    return pipeline.transform(attacks, fourclass_labels(attacks, taxonomy));
}

MulticlassTraining train_multiclass(const FittedPipeline& pipeline, const LabeledDataset& train,
                                    const AttackTaxonomy& taxonomy, const RunConfig& cfg) {
    const FeatureMatrix attacks = attack_matrix(pipeline, train, taxonomy);
    auto tcfg = cfg.train_config;
    tcfg.seed = cfg.seed;
    DnnConfig dnn;
    dnn.input_dim = pipeline.output_width();
    MulticlassTraining out;
    if (cfg.oversample != OversampleMode::On) {
        log_line("training 4-class DNN without oversampling on " + std::to_string(attacks.rows()) + " rows");
        out.plain = train_fourclass(attacks, std::nullopt, tcfg, dnn);
    }
    if (cfg.oversample != OversampleMode::Off) {
        auto sm = cfg.smote;
        sm.smote.seed = cfg.seed;
        sm.svm.seed = cfg.seed;
        log_line("training 4-class DNN with SVM-SMOTE on " + std::to_string(attacks.rows()) + " rows");
        out.oversampled = train_fourclass(attacks, sm, tcfg, dnn);
        for (const auto& line : out.oversampled->resample_log) log_line("  " + line);
        for (const auto& [cls, n] : out.oversampled->synthetic_counts)
            log_line("  synthetic " + attack_class_names().at(static_cast<std::size_t>(cls)) + ": " +
                     std::to_string(n));
    }
    return out;
}

std::string_view disposition_name(Disposition d) {
    switch (d) {
        case Disposition::Normal: return "normal";
        case Disposition::DoS: return "DoS";
        case Disposition::Probe: return "Probe";
        case Disposition::R2L: return "R2L";
        case Disposition::U2R: return "U2R";
        case Disposition::FalsePositiveNormal: return "false-positive-normal";
    }
    return "?";
}

PipelineReport run_pipeline_evaluation(const FittedPipeline& pipeline, const AnomalyDetector& detector,
                                       const std::vector<std::pair<std::string, AttackClassifier>>& classifiers,
                                       const LabeledDataset& test, const AttackTaxonomy& taxonomy) {
    PipelineReport rep;
    const auto categories = categorize_all(test, taxonomy);
    const FeatureMatrix binary = pipeline.transform(test, binary_labels(test, taxonomy));
    rep.test_rows = binary.rows();

    auto t0 = Clock::now();
    rep.stage1 = evaluate_binary(detector, binary);
    rep.stage1_seconds = seconds_since(t0);

    std::vector<std::size_t> forwarded;
    std::vector<std::size_t> true_attacks;
    for (std::size_t i = 0; i < rep.test_rows; ++i) {
        const bool flagged = rep.stage1.scores[i].verdict == Verdict::Attack;
        const bool attack = categories[i] != Category::Normal;
        if (flagged) ++rep.forwarded_to_stage2;
        if (flagged && attack) forwarded.push_back(i);
        if (flagged && !attack) ++rep.false_positive_normals;
        if (attack) true_attacks.push_back(i);
    }
    rep.survivors_evaluated = forwarded.size();

    std::vector<int> four(rep.test_rows, -1);
    for (std::size_t i = 0; i < rep.test_rows; ++i) {
        if (categories[i] != Category::Normal) four[i] = static_cast<int>(categories[i]) - 1;
    }
    auto labels_at = [&](const std::vector<std::size_t>& idx) {
        std::vector<int> l;
        l.reserve(idx.size());
        for (auto i : idx) l.push_back(four[i]);
        return l;
    };

    t0 = Clock::now();
    for (const auto& [name, clf] : classifiers) {
        StageTwoVariant v;
        v.name = name;
        v.dispositions.assign(6, 0);
        // Stage 2 sees every forwarded row, including false-positive normals.
        std::vector<std::size_t> all_forwarded;
        for (std::size_t i = 0; i < rep.test_rows; ++i) {
            if (rep.stage1.scores[i].verdict == Verdict::Attack) all_forwarded.push_back(i);
        }
        const auto fwd_pred = all_forwarded.empty() ? std::vector<int>{}
                                                    : clf.predict_labels(binary.values.select_rows(all_forwarded));
        std::vector<int> surv_pred;
        std::size_t k = 0;
        for (std::size_t i = 0; i < rep.test_rows; ++i) {
            if (rep.stage1.scores[i].verdict == Verdict::Normal) {
                ++v.dispositions[static_cast<std::size_t>(Disposition::Normal)];
                continue;
            }
            const int p = fwd_pred[k++];
            if (categories[i] == Category::Normal) {
                ++v.dispositions[static_cast<std::size_t>(Disposition::FalsePositiveNormal)];
            } else {
                ++v.dispositions[static_cast<std::size_t>(p) + 1];
                surv_pred.push_back(p);
            }
        }
        if (!true_attacks.empty()) {
            const auto gt_pred = clf.predict_labels(binary.values.select_rows(true_attacks));
            v.ground_truth = multiclass_report(confusion(labels_at(true_attacks), gt_pred, attack_class_names()));
        }
        if (!forwarded.empty())
            v.survivors = multiclass_report(confusion(labels_at(forwarded), surv_pred, attack_class_names()));
        rep.stage2.push_back(std::move(v));
    }
    rep.stage2_seconds = seconds_since(t0);
    return rep;
}

nlohmann::json PipelineReport::to_json() const {
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& v : stage2) {
        nlohmann::json disp;
        for (std::size_t d = 0; d < v.dispositions.size(); ++d)
            disp[std::string(disposition_name(static_cast<Disposition>(d)))] = v.dispositions[d];
        variants.push_back({{"variant", v.name},
                            {"ground_truth_attacks", v.ground_truth ? v.ground_truth->to_json() : nlohmann::json()},
                            {"stage1_survivors", v.survivors ? v.survivors->to_json() : nlohmann::json()},
                            {"dispositions", disp}});
    }
    return {{"format_version", 1},
            {"kind", "pipeline_report"},
            {"test_rows", test_rows},
            {"stage1", stage1.to_json()},
            {"forwarded_to_stage2", forwarded_to_stage2},
            {"false_positive_normals", false_positive_normals},
            {"survivors_evaluated", survivors_evaluated},
            {"stage2", variants},
            {"timing_seconds", {{"stage1", stage1_seconds}, {"stage2", stage2_seconds}}}};
}

std::string table3_csv(const std::vector<std::pair<std::string, MulticlassReport>>& columns) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed;
    out << "metric";
    for (const auto& [name, r] : columns) out << ',' << name;
    out << '\n';
    auto row = [&](const std::string& metric, auto get) {
        out << metric;
        for (const auto& [name, r] : columns) out << ',' << get(r);
        out << '\n';
    };
    row("accuracy", [](const MulticlassReport& r) { return r.accuracy; });
    for (std::size_t c = 0; c < kNumAttackClasses; ++c)
        row("f1_" + attack_class_names()[c], [c](const MulticlassReport& r) { return r.per_class_f1[c]; });
    row("macro_f1", [](const MulticlassReport& r) { return r.macro_f1; });
    row("micro_f1", [](const MulticlassReport& r) { return r.micro_f1; });
    row("pooled_f1", [](const MulticlassReport& r) { return r.pooled_f1; });
    return out.str();
}

// ---------------------------------------------------------------------------
// Baselines

BaselineRun run_baselines(const FeatureMatrix& train, const FeatureMatrix& test, const RunConfig& cfg) {
    auto names = cfg.baselines;
    if (names.empty()) names = baseline_names();
    check_baseline_names(names);
    BaselineRun run;
    std::size_t n_attack = 0;
    for (int l : train.labels) n_attack += l == 1 ? 1 : 0;
    run.majority_class = 2 * n_attack > train.rows() ? 1 : 0;
    std::size_t hit = 0;
    for (int l : test.labels) hit += l == run.majority_class ? 1 : 0;
    run.majority_accuracy = safe_ratio(static_cast<double>(hit), static_cast<double>(test.rows()));

    BaselineSettings settings;
    settings.seed = cfg.seed;
    settings.mlp_train.max_epochs = cfg.train_config.max_epochs;
    settings.mlp_train.batch_size = cfg.train_config.batch_size;
    settings.mlp_train.patience = cfg.train_config.patience;
    settings.mlp_train.val_fraction = cfg.train_config.val_fraction;
    settings.mlp_train.learning_rate = cfg.train_config.learning_rate;
    for (const auto& name : names) {
        log_line("fitting baseline " + name);
        const auto t0 = Clock::now();
        const auto model = fit_baseline(name, train.values, train.labels, settings);
        const auto pred = model->predict(test.values);
        BaselineRow row{name, binary_metrics(confusion(test.labels, pred, {"normal", "attack"}), 1),
                        seconds_since(t0)};
        log_line("  accuracy " + std::to_string(row.metrics.accuracy) + " in " + std::to_string(row.seconds) + "s");
        run.rows.push_back(std::move(row));
    }
    return run;
}

std::string table2_csv(const std::vector<BaselineRow>& rows) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed << "model,accuracy,precision,recall,f1\n";
    for (const auto& r : rows) {
        out << r.model << ',' << r.metrics.accuracy << ',' << r.metrics.precision << ',' << r.metrics.recall << ','
            << r.metrics.f1 << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Commands

void cmd_explore(const RunConfig& cfg) {
    const auto taxonomy = load_taxonomy(cfg);
    const auto train = load_split(cfg.train, "train", Split::Train);
    ensure_out(cfg);
    ExploreOptions opt;
    opt.bins = cfg.bins;
    write_exploration(train, taxonomy, cfg.out, opt);
    log_line("exploration files written to " + cfg.out.string());
}

void cmd_train_binary(const RunConfig& cfg) {
    const auto taxonomy = load_taxonomy(cfg);
    const auto train = load_split(cfg.train, "train", Split::Train);
    ensure_out(cfg);
    const auto t0 = Clock::now();
    const auto trained = train_binary(train, taxonomy, cfg);
    write_json_file(cfg.out / "pipeline.json", trained.pipeline.to_json());
    write_json_file(cfg.out / "detector.json", trained.detector.to_json());
    auto report = trained.to_json();
    report["seconds"] = seconds_since(t0);
    report["config"] = cfg.to_json();
    write_json_file(cfg.out / "train_binary_report.json", report);
    log_line("detector written to " + (cfg.out / "detector.json").string());
}

void cmd_train_multiclass(const RunConfig& cfg) {
    const auto taxonomy = load_taxonomy(cfg);
    const auto train = load_split(cfg.train, "train", Split::Train);
    ensure_out(cfg);
    const auto pipeline = FittedPipeline::fit(train, cfg.drop_constant);
    write_json_file(cfg.out / "pipeline.json", pipeline.to_json());

    const auto t0 = Clock::now();
    const auto trained = train_multiclass(pipeline, train, taxonomy, cfg);
    nlohmann::json report = {{"config", cfg.to_json()}};
    auto emit = [&](const std::optional<FourClassTraining>& t, const char* variant) {
        if (!t) return;
        write_json_file(classifier_file(cfg.out, variant), t->classifier.to_json());
        nlohmann::json synth = nlohmann::json::object();
        for (const auto& [cls, n] : t->synthetic_counts) synth[attack_class_names().at(static_cast<std::size_t>(cls))] = n;
        nlohmann::json counts = nlohmann::json::object();
        for (std::size_t c = 0; c < t->class_counts.size(); ++c) counts[attack_class_names()[c]] = t->class_counts[c];
        report[variant] = {{"history", t->history.to_json()},
                           {"training_class_counts", counts},
                           {"synthetic_counts", synth},
                           {"resample_log", t->resample_log}};
    };
    emit(trained.plain, kVariantPlain);
    emit(trained.oversampled, kVariantOversampled);
    report["seconds"] = seconds_since(t0);
    write_json_file(cfg.out / "train_multiclass_report.json", report);
}

void cmd_baselines(const RunConfig& cfg) {
    check_baseline_names(cfg.baselines);
    const auto taxonomy = load_taxonomy(cfg);
    const auto train = load_split(cfg.train, "train", Split::Train);
    const auto test = load_split(cfg.test, "test", Split::Test);
    ensure_out(cfg);
    const auto pipeline = FittedPipeline::fit(train, cfg.drop_constant);
    const auto run = run_baselines(pipeline.transform(train, binary_labels(train, taxonomy)),
                                   pipeline.transform(test, binary_labels(test, taxonomy)), cfg);
    write_text_file(cfg.out / "baselines.csv", table2_csv(run.rows));
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : run.rows)
        rows.push_back({{"model", r.model}, {"metrics", r.metrics.to_json()}, {"seconds", r.seconds}});
    write_json_file(cfg.out / "baselines.json",
                    {{"majority_class", run.majority_class == 1 ? "attack" : "normal"},
                     {"majority_accuracy", run.majority_accuracy},
                     {"models", rows}});
}

void cmd_evaluate(const RunConfig& cfg) {
    const auto taxonomy = load_taxonomy(cfg);
    const auto test = load_split(cfg.test, "test", Split::Test);
    const auto dir = models_dir(cfg);
    const auto pipeline = FittedPipeline::from_json(read_json_file(dir / "pipeline.json"));
    const auto detector = AnomalyDetector::from_json(read_json_file(dir / "detector.json"));
    std::vector<std::pair<std::string, AttackClassifier>> classifiers;
    for (const char* variant : {kVariantPlain, kVariantOversampled}) {
        const auto path = classifier_file(dir, variant);
        if (std::filesystem::exists(path))
            classifiers.emplace_back(variant, AttackClassifier::from_json(read_json_file(path)));
    }
    if (classifiers.empty()) throw ConfigError("no classifier files found in " + dir.string());
    ensure_out(cfg);

    const auto rep = run_pipeline_evaluation(pipeline, detector, classifiers, test, taxonomy);
    write_json_file(cfg.out / "pipeline_report.json", rep.to_json());
    write_text_file(cfg.out / "confusion_binary.csv", rep.stage1.confusion.to_csv());
    write_text_file(cfg.out / "scores.csv", scores_csv(rep.stage1.scores));
    write_text_file(cfg.out / "table2_autoencoder.csv",
                    table2_csv({BaselineRow{"autoencoder", rep.stage1.attack_positive, rep.stage1_seconds}}));
    std::vector<std::pair<std::string, MulticlassReport>> gt_cols;
    std::vector<std::pair<std::string, MulticlassReport>> surv_cols;
    for (const auto& v : rep.stage2) {
        if (v.ground_truth) {
            write_text_file(cfg.out / ("confusion_fourclass_" + v.name + "_ground_truth.csv"),
                            v.ground_truth->confusion.to_csv());
            gt_cols.emplace_back(v.name, *v.ground_truth);
        }
        if (v.survivors) {
            write_text_file(cfg.out / ("confusion_fourclass_" + v.name + "_survivors.csv"),
                            v.survivors->confusion.to_csv());
            surv_cols.emplace_back(v.name, *v.survivors);
        }
    }
    if (!gt_cols.empty()) write_text_file(cfg.out / "table3_ground_truth.csv", table3_csv(gt_cols));
    if (!surv_cols.empty()) write_text_file(cfg.out / "table3_survivors.csv", table3_csv(surv_cols));
    log_line("stage 1 accuracy " + std::to_string(rep.stage1.attack_positive.accuracy) + ", f1 " +
             std::to_string(rep.stage1.attack_positive.f1));
    for (const auto& [name, r] : gt_cols)
        log_line("stage 2 (" + name + ") accuracy " + std::to_string(r.accuracy) + ", macro f1 " +
                 std::to_string(r.macro_f1));
}

void cmd_pipeline(const RunConfig& cfg) {
    cmd_train_binary(cfg);
    cmd_train_multiclass(cfg);
    auto eval_cfg = cfg;
    eval_cfg.models = cfg.out;
    cmd_evaluate(eval_cfg);
}

void cmd_fixture(std::size_t n_per_class, std::uint64_t seed, const std::filesystem::path& path) {
    if (n_per_class == 0) throw ConfigError("fixture: --n must be >= 1");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_kdd_file(path, make_fixture(n_per_class, seed));
    log_line("wrote " + std::to_string(n_per_class * kNumCategories) + " records to " + path.string());
}

}  // namespace nids
