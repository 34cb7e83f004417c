#include "dynalay/agent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynalay/error.hpp"

namespace dynalay {
namespace {

void append(std::vector<double>& out, std::span<const double> v) { out.insert(out.end(), v.begin(), v.end()); }

std::span<const double> take(std::span<const double>& src, std::size_t n) {
    auto head = src.first(n);
    src = src.subspan(n);
    return head;
}

void fill(std::span<double> dst, std::span<const double> src) { std::copy(src.begin(), src.end(), dst.begin()); }

} // namespace

std::vector<double> AgentNet::flat_params() const {
    std::vector<double> out;
    append(out, hidden.w.data());
    append(out, hidden.b);
    append(out, output.w.data());
    append(out, output.b);
    return out;
}

void AgentNet::assign_flat(std::span<const double> params) {
    const std::size_t need = hidden.w.data().size() + hidden.b.size() + output.w.data().size() + output.b.size();
    if (params.size() != need)
        throw InputError("AgentNet::assign_flat: expected " + std::to_string(need) + " values, got " +
                         std::to_string(params.size()));
    fill(hidden.w.data(), take(params, hidden.w.data().size()));
    fill(hidden.b, take(params, hidden.b.size()));
    fill(output.w.data(), take(params, output.w.data().size()));
    fill(output.b, take(params, output.b.size()));
}

AgentGrad AgentGrad::zeros_like(const AgentNet& agent) {
    return {DenseGrad::zeros_like(agent.hidden), DenseGrad::zeros_like(agent.output)};
}

std::vector<double> AgentGrad::flat() const {
    std::vector<double> out;
    append(out, hidden.w.data());
    append(out, hidden.b);
    append(out, output.w.data());
    append(out, output.b);
    return out;
}

AgentNet make_agent(std::size_t n_observed, std::size_t n_fpi_layers, std::size_t hidden_dim, std::uint64_t seed,
                    double epsilon, double temperature) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("agent: epsilon must lie in [0, 1]");
    if (!(temperature > 0.0)) throw InputError("agent: temperature must be > 0");
    return AgentNet{random_dense_layer(agent_feature_dim(n_observed), hidden_dim, Activation::Tanh, seed),
                    zero_dense_layer(hidden_dim, n_fpi_layers + 1, Activation::Identity), epsilon, temperature};
}

Vector build_agent_features(const std::vector<Vector>& activations, double lambda, int step_index, int max_steps) {
    if (activations.empty()) throw InputError("build_agent_features: no activations");
    if (max_steps < 1) throw InputError("build_agent_features: max_steps must be >= 1");
    Vector features;
    features.reserve(agent_feature_dim(activations.size()));
    for (const Vector& a : activations) {
        if (a.empty()) throw InputError("build_agent_features: empty activation vector");
        const double n = static_cast<double>(a.size());
        double mean = 0.0;
        for (double v : a) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : a) var += (v - mean) * (v - mean);
        features.push_back(mean);
        features.push_back(std::sqrt(var / n));
        features.push_back(*std::max_element(a.begin(), a.end()));
    }
    features.push_back(lambda);
    features.push_back(static_cast<double>(step_index) / static_cast<double>(max_steps));
    if (!all_finite(features)) throw NumericError("build_agent_features: non-finite feature");
    return features;
}

Vector agent_logits(const AgentNet& agent, std::span<const double> features) {
    if (features.size() != agent.input_dim())
        throw InputError("agent: expected " + std::to_string(agent.input_dim()) + " features, got " +
                         std::to_string(features.size()));
    return dense_forward(agent.output, dense_forward(agent.hidden, features));
}

namespace {

Vector softmax_scaled(std::span<const double> logits, double temperature) {
    if (!all_finite(logits)) throw NumericError("agent: non-finite logits");
    double mx = logits[0];
    for (double l : logits) mx = std::max(mx, l);
    Vector p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += (p[i] = std::exp((logits[i] - mx) / temperature));
    for (double& v : p) v /= sum;
    return p;
}

} // namespace

Vector agent_forward(const AgentNet& agent, std::span<const double> features) {
    return softmax_scaled(agent_logits(agent, features), agent.temperature);
}

ActionChoice select_action(std::span<const double> probs, double epsilon, SelectMode mode, Rng& rng) {
    if (probs.empty()) throw InputError("select_action: empty distribution");
    std::size_t chosen = 0;
    bool explored = false;
    if (mode == SelectMode::EvalGreedy) {
        for (std::size_t i = 1; i < probs.size(); ++i)
            if (probs[i] > probs[chosen]) chosen = i;
    } else if (epsilon > 0.0 && rng.uniform() < epsilon) {
        chosen = rng.index(probs.size());
        explored = true;
    } else {
        const double r = rng.uniform();
        double cum = 0.0;
        chosen = probs.size() - 1;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            cum += probs[i];
            if (r < cum) {
                chosen = i;
                break;
            }
        }
        // Round-off in the cumulative sum must never land on a zero-probability tail.
        while (probs[chosen] == 0.0 && chosen > 0) --chosen;
    }
    return {Action::from_index(chosen), std::log(probs[chosen]), explored};
}

double policy_surrogate(const AgentNet& agent, const std::vector<EpisodeTrace>& episodes, double baseline) {
    if (episodes.empty()) throw InputError("policy_surrogate: no episodes");
    double total = 0.0;
    for (const EpisodeTrace& ep : episodes) {
        const double advantage = ep.agent_return - baseline;
        for (const EpisodeStep& step : ep.steps) {
            const Vector p = agent_forward(agent, step.features);
            total -= std::log(p[step.action.index()]) * advantage;
        }
    }
    return total / static_cast<double>(episodes.size());
}

AgentGrad agent_policy_gradient(const AgentNet& agent, const std::vector<EpisodeTrace>& episodes, double baseline) {
    if (episodes.empty()) throw InputError("agent_policy_gradient: no episodes");
    AgentGrad grad = AgentGrad::zeros_like(agent);
    const double inv_n = 1.0 / static_cast<double>(episodes.size());
    for (const EpisodeTrace& ep : episodes) {
        const double advantage = ep.agent_return - baseline;
        if (advantage == 0.0) continue;
        for (const EpisodeStep& step : ep.steps) {
            const Vector h = dense_forward(agent.hidden, step.features);
            const Vector p = softmax_scaled(dense_forward(agent.output, h), agent.temperature);
            // ∂(−log π_a)/∂logits = (P − onehot(a)) / T
            Vector g_logits(p.size());
            const std::size_t a = step.action.index();
            if (a >= p.size()) throw InputError("agent_policy_gradient: action outside the agent's alphabet");
            for (std::size_t i = 0; i < p.size(); ++i)
                g_logits[i] = (p[i] - (i == a ? 1.0 : 0.0)) / agent.temperature * advantage * inv_n;

            DenseLayerVjp out = dense_vjp(agent.output, h, g_logits);
            DenseLayerVjp hid = dense_vjp(agent.hidden, step.features, out.u_x);
            grad.output.add(DenseGrad{std::move(out.grad_w), std::move(out.grad_b)});
            grad.hidden.add(DenseGrad{std::move(hid.grad_w), std::move(hid.grad_b)});
        }
    }
    return grad;
}

} // namespace dynalay
