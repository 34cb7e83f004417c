#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynalay/config.hpp"
#include "dynalay/trainer.hpp"

namespace dynalay {

enum class PresetKind { TwoMoons, HardEasyMix, LambdaSweep, FpiAblation };

/// CLI spelling: "two-moons", "hard-easy-mix", "lambda-sweep", "fpi-ablation".
std::string_view preset_name(PresetKind kind) noexcept;
std::optional<PresetKind> parse_preset_name(std::string_view name);

/// A preset applied to a base config: the resolved run config plus the cells to run.
struct ExperimentPreset {
    PresetKind kind = PresetKind::TwoMoons;
    RunConfig config;
    std::vector<std::uint64_t> seeds;
    /// Only used by LambdaSweep.
    std::vector<double> lambdas;
};

/// Library defaults with the preset's overrides applied. Config files for a
/// preset are read on top of this.
RunConfig preset_defaults(PresetKind kind);

/// Uses `cfg` as given. Seeds and lambdas listed in cfg.preset replace the
/// preset's default lists.
ExperimentPreset make_preset(PresetKind kind, const RunConfig& cfg);
inline ExperimentPreset make_preset(PresetKind kind) { return make_preset(kind, preset_defaults(kind)); }

/// One trained cell, evaluated on its test split.
struct SeedRun {
    std::uint64_t seed = 0;
    double lambda = 0.0;
    EvalReport test;
    std::vector<EpochMetrics> history;
    MainModel model;
    AgentNet agent;
};

/// Full three-phase training with train.seed = data.seed = seed, then greedy evaluation.
SeedRun train_and_evaluate(const RunConfig& cfg, std::uint64_t seed);

struct DifficultySplit {
    double fpi_per_easy = 0.0;
    double fpi_per_hard = 0.0;
    double accuracy_easy = 0.0;
    double accuracy_hard = 0.0;
    /// (hard − easy) / easy; +inf when easy is 0 and hard is not.
    double relative_gap() const noexcept;
};
/// Requires difficulty tags on `data` and traces in sample order.
DifficultySplit split_by_difficulty(const EvalReport& report, const Dataset& data);

/// Spearman rank correlation with average ranks for ties; 0 if either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

struct AblationCell {
    int model = 0;  ///< number of leading fixed-point layers on the path
    std::uint64_t seed = 0;
    double test_ce = 0.0;
    double test_accuracy = 0.0;
};
/// Models 0..n_fpi_layers, each trained along its fixed path for cfg.train.epochs.
std::vector<AblationCell> run_fpi_ablation(const ExperimentPreset& preset);

struct PresetReport {
    PresetKind kind = PresetKind::TwoMoons;
    std::vector<SeedRun> runs;
    /// HardEasyMix: one entry per run.
    std::vector<DifficultySplit> difficulty;
    /// FpiAblation only.
    std::vector<AblationCell> ablation;
};

/// Runs every cell and writes CSV and SVG reports into out_dir.
PresetReport run_preset(const ExperimentPreset& preset, const std::filesystem::path& out_dir);

} // namespace dynalay
