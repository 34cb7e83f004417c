#pragma once

#include <span>
#include <vector>

#include "dynalay/action.hpp"
#include "dynalay/layers.hpp"
#include "dynalay/reward.hpp"
#include "dynalay/rng.hpp"

namespace dynalay {

/// Small policy network: Tanh hidden layer, linear output with one logit per
/// action (Nop plus one per fixed-point layer).
struct AgentNet {
    DenseLayer hidden;
    DenseLayer output;
    double epsilon = 0.1;
    double temperature = 1.0;

    std::size_t input_dim() const noexcept { return hidden.input_dim(); }
    std::size_t n_actions() const noexcept { return output.output_dim(); }

    std::vector<double> flat_params() const;
    /// Inverse of flat_params. Throws InputError on a length mismatch.
    void assign_flat(std::span<const double> params);

    friend bool operator==(const AgentNet&, const AgentNet&) = default;
};

struct AgentGrad {
    DenseGrad hidden;
    DenseGrad output;

    static AgentGrad zeros_like(const AgentNet& agent);
    std::vector<double> flat() const;
};

/// Random hidden weights, zero output layer: the initial policy is uniform.
AgentNet make_agent(std::size_t n_observed, std::size_t n_fpi_layers, std::size_t hidden_dim, std::uint64_t seed,
                    double epsilon = 0.1, double temperature = 1.0);

/// Length of the feature vector for `n_observed` activation vectors.
constexpr std::size_t agent_feature_dim(std::size_t n_observed) noexcept { return 3 * n_observed + 2; }

/// (mean, std, max) of each activation vector, then λ, then step/max_steps.
/// std is the population standard deviation.
Vector build_agent_features(const std::vector<Vector>& activations, double lambda, int step_index, int max_steps);

Vector agent_logits(const AgentNet& agent, std::span<const double> features);
/// softmax(logits / temperature). Throws NumericError on non-finite logits.
Vector agent_forward(const AgentNet& agent, std::span<const double> features);

enum class SelectMode { TrainSample, EvalGreedy };

struct ActionChoice {
    Action action;
    double log_prob = 0.0;
    bool explored = false;
};

/// TrainSample: with probability ε a uniform action, otherwise a draw from P.
/// EvalGreedy: argmax of P, lowest index on ties. log_prob is log P[chosen].
ActionChoice select_action(std::span<const double> probs, double epsilon, SelectMode mode, Rng& rng);

/// mean over episodes of −Σ_t log π(a_t | features_t)·(return − baseline)
double policy_surrogate(const AgentNet& agent, const std::vector<EpisodeTrace>& episodes, double baseline);

/// Gradient of policy_surrogate with respect to the agent's parameters only.
/// Uses each trace's agent_return. Throws InputError on an empty list.
AgentGrad agent_policy_gradient(const AgentNet& agent, const std::vector<EpisodeTrace>& episodes, double baseline);

} // namespace dynalay
