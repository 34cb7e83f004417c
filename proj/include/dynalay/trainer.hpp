#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynalay/agent.hpp"
#include "dynalay/data.hpp"
#include "dynalay/fpi_engine.hpp"
#include "dynalay/layers.hpp"
#include "dynalay/reward.hpp"

namespace dynalay {

/// Activations the agent observes at each decision: the current state and the
/// head's logits on it.
inline constexpr std::size_t kObservedActivations = 2;

struct ModelConfig {
    std::size_t state_dim = 16;
    std::size_t n_fpi_layers = 3;
    Activation fpi_activation = Activation::Tanh;
    double contraction_target = kDefaultContractionTarget;
    std::size_t agent_hidden = 16;
    double epsilon = 0.1;
    double temperature = 1.0;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class OptimizerKind { Sgd, Adam };

/// What the policy gradient maximizes per episode.
enum class AgentReturn {
    Reward,        ///< the episode reward R
    NegTotalLoss,  ///< −(CE − γ·R)
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double agent_learning_rate = 1e-3;
    int batch_size = 64;
    int epochs = 100;
    int warmup_epochs = 20;
    int max_steps_per_episode = 4;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    AgentReturn agent_return = AgentReturn::NegTotalLoss;
    /// Moving-average factor of the policy-gradient baseline.
    double baseline_decay = 0.9;
    /// Validation rows every this many epochs (0: only after the last epoch).
    int eval_every = 1;
    FpiConfig fpi;
    RewardParams reward;
    ModelConfig model;

    /// Throws InputError on out-of-range values.
    void validate() const;
    /// Epochs of joint training after both warm-ups.
    int joint_epochs() const noexcept { return epochs - warmup_epochs; }
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct MainGrad;

/// encoder (m → d, Tanh), fixed-point layers (d → d, injection d), head (d → classes).
struct MainModel {
    DenseLayer encoder;
    std::vector<FpiLayer> fpi_layers;
    DenseLayer head;

    std::size_t state_dim() const noexcept { return encoder.output_dim(); }
    std::size_t n_classes() const noexcept { return head.output_dim(); }

    std::vector<double> flat_params() const;
    /// Copy with parameters replaced from `params` (flat_params order), every
    /// fixed-point layer re-certified by enforce_contraction.
    MainModel with_flat_params(std::span<const double> params) const;
    bool all_certified() const noexcept;
    /// FNV-1a over the exact bits of every parameter.
    std::string digest() const;

    friend bool operator==(const MainModel&, const MainModel&) = default;
};

struct MainGrad {
    DenseGrad encoder;
    std::vector<FpiGrad> fpi;
    DenseGrad head;

    static MainGrad zeros_like(const MainModel& model);
    void add(const MainGrad& other);
    std::vector<double> flat() const;
};

MainModel make_main_model(std::size_t input_dim, std::size_t n_classes, const ModelConfig& cfg, std::uint64_t seed);
AgentNet make_agent_for(const ModelConfig& cfg, std::uint64_t seed);
std::string digest(const AgentNet& agent);

/// Who picks the actions of an episode.
class Policy {
public:
    static Policy agent(const AgentNet& net, SelectMode mode) { return Policy(&net, mode, {}); }
    /// Fpi(path[0]), Fpi(path[1]), ..., then Nop.
    static Policy fixed(std::vector<std::size_t> path) { return Policy(nullptr, SelectMode::EvalGreedy, std::move(path)); }

    bool is_agent() const noexcept { return agent_ != nullptr; }
    const AgentNet* agent_net() const noexcept { return agent_; }
    SelectMode mode() const noexcept { return mode_; }
    const std::vector<std::size_t>& path() const noexcept { return path_; }

private:
    Policy(const AgentNet* a, SelectMode m, std::vector<std::size_t> p) : agent_(a), mode_(m), path_(std::move(p)) {}
    const AgentNet* agent_;
    SelectMode mode_;
    std::vector<std::size_t> path_;
};

struct EpisodeResult {
    Vector logits;
    EpisodeTrace trace;
    /// states[0] = encoder(x); states[k+1] = fixed point reached by the k-th Fpi step.
    std::vector<Vector> states;
};

/// Runs one episode: encode, let the policy apply fixed-point layers until Nop
/// or max_steps_per_episode decisions, then apply the head.
EpisodeResult episode_forward(const MainModel& model, const Policy& policy, std::span<const double> x,
                              const TrainConfig& cfg, Rng& rng);

/// Fills correct/cross_entropy/reward/agent_return of an episode for `label`.
void score_episode(EpisodeResult& ep, std::size_t label, const CostLedger& ledger, const TrainConfig& cfg);

/// Gradient of the sample's cross-entropy through exactly the layers its trace
/// used, with implicit gradients through each fixed-point solve.
MainGrad main_sample_gradient(const MainModel& model, const EpisodeResult& ep, std::span<const double> x,
                              std::size_t label, const TrainConfig& cfg);

/// Batch gradient: per-sample gradients summed in the
/// order given. Layers no episode used keep an exactly zero gradient.
MainGrad main_batch_gradient(const MainModel& model, const std::vector<EpisodeResult>& episodes,
                             const Dataset& data, std::span<const std::size_t> indices, const TrainConfig& cfg);

CostLedger cost_ledger_for(const MainModel& model);

/// Plain SGD or Adam over a flat parameter vector.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {}
    void step(std::span<double> params, std::span<const double> grad);
    double learning_rate() const noexcept { return lr_; }
    void set_learning_rate(double lr) noexcept { lr_ = lr; }

private:
    OptimizerKind kind_;
    double lr_;
    std::vector<double> m_, v_;
    long t_ = 0;
};

struct EpochMetrics {
    int epoch = 0;
    std::string split;
    double ce = 0.0;
    double reward_mean = 0.0;
    double cost_mean = 0.0;
    double accuracy = 0.0;
    /// Fraction of decisions per action index (Nop first).
    std::vector<double> action_freq;
    double wall_seconds = 0.0;
};

struct EvalReport {
    double accuracy = 0.0;
    double ce_mean = 0.0;
    double reward_mean = 0.0;
    double cost_mean = 0.0;
    double wall_seconds = 0.0;
    /// Decision counts per action index (Nop first).
    std::vector<std::size_t> histogram;
    std::size_t total_decisions = 0;
    std::vector<EpisodeTrace> traces;

    std::vector<double> action_frequencies() const;
};

/// Deterministic given (model, policy, data, cfg, seed). Agent policies default to greedy.
EvalReport evaluate(const MainModel& model, const Policy& policy, const Dataset& data, const TrainConfig& cfg,
                    std::uint64_t seed = 0);

struct Checkpoint {
    TrainConfig config;
    int epoch = 0;
    MainModel main;
    AgentNet agent;
    std::string rng_digest;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Runs the three training phases and records metrics. Batches are visited in
/// a seeded order; per-sample gradients are summed in sample order.
class Trainer {
public:
    Trainer(TrainConfig cfg, MainModel model, AgentNet agent);
    /// Builds model and agent for `data` from cfg.seed.
    Trainer(TrainConfig cfg, const Dataset& data);

    /// Warm-up of the main model: every fixed-point layer applied once, in order.
    void pretrain_main(const Dataset& data, int epochs);
    /// Agent-only updates against the frozen main model.
    void pretrain_agent(const Dataset& data, int epochs);
    /// Main and agent updates from the same episodes, main first.
    void train_joint(const Dataset& data, int epochs);
    /// Main-only training along a fixed action path (no agent).
    void train_fixed_path(const Dataset& data, const std::vector<std::size_t>& path, int epochs,
                          const std::string& split);
    /// warm-up main, warm-up agent, joint for the remaining epochs.
    void run(const Dataset& train, const Dataset* val = nullptr);

    void set_validation(const Dataset* val) noexcept { val_ = val; }

    const MainModel& model() const noexcept { return model_; }
    const AgentNet& agent() const noexcept { return agent_; }
    const TrainConfig& config() const noexcept { return cfg_; }
    const std::vector<EpochMetrics>& history() const noexcept { return history_; }
    int epoch() const noexcept { return epoch_; }
    double baseline() const noexcept { return baseline_; }
    Checkpoint checkpoint() const;

private:
    enum class Updates { Main, Agent, Both };
    void run_epoch(const Dataset& data, const Policy& policy, Updates updates, const std::string& split);
    void step_main(const MainGrad& grad);
    void step_agent(const std::vector<EpisodeTrace>& traces);

    TrainConfig cfg_;
    MainModel model_;
    AgentNet agent_;
    CostLedger ledger_;
    Optimizer main_opt_;
    Optimizer agent_opt_;
    Rng rng_;
    double baseline_ = 0.0;
    bool baseline_init_ = false;
    int epoch_ = 0;
    const Dataset* val_ = nullptr;
    std::vector<EpochMetrics> history_;
};

// Free-function forms of the training phases.
MainModel pretrain_main(MainModel model, const Dataset& data, const TrainConfig& cfg);
AgentNet pretrain_agent(const MainModel& frozen, AgentNet agent, const Dataset& data, const TrainConfig& cfg);

struct JointResult {
    MainModel model;
    AgentNet agent;
    std::vector<EpochMetrics> history;
};
JointResult train_joint(MainModel model, AgentNet agent, const Dataset& data, const TrainConfig& cfg);

/// Columns: epoch,split,ce,reward_mean,cost_mean,accuracy,freq_nop,freq_fpi0,...
void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& history,
                       std::size_t n_actions);
/// Columns: epoch,split,wall_seconds
void write_timing_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& history);

} // namespace dynalay
