#include "dynalay/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynalay/error.hpp"

namespace dynalay {

void RewardParams::validate() const {
    if (!(alpha >= 0.0) || !(beta_cost >= 0.0) || !(gamma >= 0.0))
        throw InputError("reward: alpha, beta and gamma must be >= 0");
    if (!(lambda >= 0.0)) throw InputError("reward: lambda must be >= 0");
}

CostLedger CostLedger::from_dims(const std::vector<std::size_t>& layer_dims, std::size_t d_ref) {
    if (d_ref == 0) throw InputError("CostLedger: reference dimension must be positive");
    CostLedger ledger;
    for (std::size_t d : layer_dims) {
        const double r = static_cast<double>(d) / static_cast<double>(d_ref);
        ledger.layer_weights.push_back(r * r);
    }
    return ledger;
}

CostLedger CostLedger::uniform(std::size_t n_layers, double weight) {
    return CostLedger{std::vector<double>(n_layers, weight)};
}

double CostLedger::weight(const Action& a) const {
    if (a.is_nop()) return 0.0;
    if (a.layer >= layer_weights.size())
        throw InputError("CostLedger: action refers to layer " + std::to_string(a.layer) + " of " +
                         std::to_string(layer_weights.size()));
    return layer_weights[a.layer];
}

std::size_t EpisodeTrace::fpi_actions() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(steps.begin(), steps.end(), [](const EpisodeStep& s) { return !s.action.is_nop(); }));
}

double compute_cost(const EpisodeTrace& trace, const CostLedger& ledger) {
    double cost = 0.0;
    for (const EpisodeStep& s : trace.steps) {
        if (s.action.is_nop()) continue;
        cost += s.iterations * ledger.weight(s.action);
    }
    return cost;
}

double compute_reward(bool correct, double cost, int consecutive, const RewardParams& p) {
    if (cost < 0.0 || consecutive < 0) throw InputError("compute_reward: cost and count must be >= 0");
    return p.alpha * (correct ? 1.0 : 0.0) - (p.beta_cost + p.lambda) * cost * consecutive;
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
    if (label >= logits.size())
        throw InputError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                         std::to_string(logits.size()) + " classes");
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - mx);
    return std::max(0.0, std::log(sum) - (logits[label] - mx));
}

Vector cross_entropy_grad(std::span<const double> logits, std::size_t label) {
    if (label >= logits.size()) throw InputError("cross_entropy_grad: label out of range");
    const double mx = *std::max_element(logits.begin(), logits.end());
    Vector g(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) sum += (g[i] = std::exp(logits[i] - mx));
    for (double& v : g) v /= sum;
    g[label] -= 1.0;
    return g;
}

double total_loss(double ce, double reward, const RewardParams& p) { return ce - p.gamma * reward; }

} // namespace dynalay
