#pragma once

// Command orchestration for the two-stage pipeline: configuration, model
// persistence and report emission. The command-line front end lives in
// tools/nids.cpp; everything here is callable from tests.

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nids/baselines.hpp"
#include "nids/classifier.hpp"
#include "nids/dataset.hpp"
#include "nids/detector.hpp"
#include "nids/metrics.hpp"
#include "nids/preprocess.hpp"
#include "nids/resample.hpp"

namespace nids {

enum class OversampleMode { Off, On, Both };
OversampleMode parse_oversample(const std::string& text);
std::string oversample_name(OversampleMode m);

struct RunConfig {
    std::filesystem::path train;
    std::filesystem::path test;
    std::filesystem::path taxonomy;  // empty: built-in mapping
    std::filesystem::path out = "out";
    std::filesystem::path models;    // evaluate: where models are read; empty = out
    std::uint64_t seed = 0;
    Calibration calibration = QuantileCalibration{};
    OversampleMode oversample = OversampleMode::Both;
    SvmSmoteConfig smote;
    TrainConfig train_config;
    std::vector<std::string> baselines;  // empty: all
    std::size_t bins = 40;
    bool drop_constant = false;

    nlohmann::json to_json() const;
};

// Overlays the fields present in `j` onto cfg. Unknown keys are rejected.
//
// {"train", "test", "taxonomy", "out", "models": path strings,
//  "seed": int, "calibration": "quantile:<q>" | "labeled-f1",
//  "oversample": "on" | "off" | "both",
//  "smote": {"k_neighbors", "m_neighbors", "out_step"},
//  "train_config": {"batch_size", "val_fraction", "patience", "max_epochs", "learning_rate"},
//  "baselines": [names], "bins": int, "drop_constant": bool}
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

// Maps the active exception to an exit code (call inside a catch block).
int exit_code_for_current_exception();

void log_line(const std::string& message);

// ---------------------------------------------------------------------------
// Experiments (library-level, used by the commands and the acceptance suite)

struct BinaryTraining {
    FittedPipeline pipeline;
    AnomalyDetector detector;
    TrainHistory history;
    std::size_t normal_train_rows = 0;
    std::size_t holdout_rows = 0;
    nlohmann::json to_json() const;
};

// Fits the pipeline on all of `train`, holds out val_fraction of the rows,
// trains the autoencoder on the remaining normals (holdout normals drive
// early stopping) and calibrates alpha on the holdout.
BinaryTraining train_binary(const LabeledDataset& train, const AttackTaxonomy& taxonomy, const RunConfig& cfg);

struct BinaryEvaluation {
    ConfusionMatrix confusion;         // classes normal, attack
    BinaryMetrics attack_positive;
    BinaryMetrics normal_positive;
    std::vector<ScoredSample> scores;
    nlohmann::json to_json() const;    // without per-row scores
};

BinaryEvaluation evaluate_binary(const AnomalyDetector& detector, const FeatureMatrix& test);

// Score dump: row_index,reconstruction_error,verdict
std::string scores_csv(const std::vector<ScoredSample>& scores);

struct MulticlassTraining {
    std::optional<FourClassTraining> plain;
    std::optional<FourClassTraining> oversampled;
};

MulticlassTraining train_multiclass(const FittedPipeline& pipeline, const LabeledDataset& train,
                                    const AttackTaxonomy& taxonomy, const RunConfig& cfg);

// Attack rows of ds, transformed, with 4-class labels.
FeatureMatrix attack_matrix(const FittedPipeline& pipeline, const LabeledDataset& ds, const AttackTaxonomy& taxonomy);

struct BaselineRow {
    std::string model;
    BinaryMetrics metrics;
    double seconds = 0.0;
};

struct BaselineRun {
    std::vector<BaselineRow> rows;
    double majority_accuracy = 0.0;  // predicting the training majority class on test
    int majority_class = 0;
};

BaselineRun run_baselines(const FeatureMatrix& train, const FeatureMatrix& test, const RunConfig& cfg);

// model,accuracy,precision,recall,f1
std::string table2_csv(const std::vector<BaselineRow>& rows);

// Final disposition of every test row.
enum class Disposition { Normal, DoS, Probe, R2L, U2R, FalsePositiveNormal };
std::string_view disposition_name(Disposition d);

struct StageTwoVariant {
    std::string name;  // "without_oversampling" / "with_oversampling"
    std::optional<MulticlassReport> ground_truth;
    std::optional<MulticlassReport> survivors;
    std::vector<std::size_t> dispositions;  // indexed by Disposition
};

struct PipelineReport {
    BinaryEvaluation stage1;
    std::size_t test_rows = 0;
    std::size_t forwarded_to_stage2 = 0;     // stage-1 attack verdicts
    std::size_t false_positive_normals = 0;  // forwarded rows that are truly normal
    std::size_t survivors_evaluated = 0;     // forwarded rows that are true attacks
    std::vector<StageTwoVariant> stage2;
    double stage1_seconds = 0.0;
    double stage2_seconds = 0.0;
    nlohmann::json to_json() const;
};

PipelineReport run_pipeline_evaluation(const FittedPipeline& pipeline, const AnomalyDetector& detector,
                                       const std::vector<std::pair<std::string, AttackClassifier>>& classifiers,
                                       const LabeledDataset& test, const AttackTaxonomy& taxonomy);

// metric,<variant...> rows: accuracy, f1_DoS..f1_U2R, macro_f1, micro_f1, pooled_f1.
std::string table3_csv(const std::vector<std::pair<std::string, MulticlassReport>>& columns);

// ---------------------------------------------------------------------------
// Commands. Each writes only under cfg.out (evaluate also reads cfg.models).

void cmd_explore(const RunConfig& cfg);
void cmd_train_binary(const RunConfig& cfg);
void cmd_train_multiclass(const RunConfig& cfg);
void cmd_baselines(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_pipeline(const RunConfig& cfg);
void cmd_fixture(std::size_t n_per_class, std::uint64_t seed, const std::filesystem::path& path);

// JSON file helpers with format checks handled by the loaders.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace nids
