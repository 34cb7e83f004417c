#pragma once

#include <cstddef>
#include <vector>

#include "dynalay/action.hpp"
#include "dynalay/linalg.hpp"

namespace dynalay {

struct RewardParams {
    double alpha = 0.5;
    double beta_cost = 0.3;
    double gamma = 0.2;
    double lambda = 0.0;

    void validate() const;
    friend bool operator==(const RewardParams&, const RewardParams&) = default;
};

/// Per-layer cost weight per solver iteration. Nop costs nothing. Wall-clock
/// time is recorded next to these units but never feeds the reward.
struct CostLedger {
    std::vector<double> layer_weights;

    /// weight_i = (d_i / d_ref)² for every layer.
    static CostLedger from_dims(const std::vector<std::size_t>& layer_dims, std::size_t d_ref);
    static CostLedger uniform(std::size_t n_layers, double weight = 1.0);
    double weight(const Action& a) const;
};

struct EpisodeStep {
    Action action;
    int iterations = 0;
    double cost_units = 0.0;
    /// log π(action) under the policy (not the exploration mixture).
    double log_prob = 0.0;
    /// Agent input observed before the decision.
    Vector features;
};

struct EpisodeTrace {
    std::size_t sample_id = 0;
    std::vector<EpisodeStep> steps;
    int consecutive_layer_count = 0;
    bool correct = false;
    double reward = 0.0;
    double cross_entropy = 0.0;
    /// Scalar the policy gradient maximizes for this episode.
    double agent_return = 0.0;

    std::size_t fpi_actions() const noexcept;
};

/// Σ over Fpi steps of iterations × layer weight.
double compute_cost(const EpisodeTrace& trace, const CostLedger& ledger);

/// α·[correct] − (β + λ)·cost·consecutive
double compute_reward(bool correct, double cost, int consecutive, const RewardParams& p);

/// −log softmax(logits)[label], max-shifted. Throws InputError on a bad label.
double cross_entropy(std::span<const double> logits, std::size_t label);
/// ∂CE/∂logits = softmax(logits) − onehot(label).
Vector cross_entropy_grad(std::span<const double> logits, std::size_t label);

/// ce − γ·reward
double total_loss(double ce, double reward, const RewardParams& p);

} // namespace dynalay
