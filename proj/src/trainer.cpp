#include "dynalay/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dynalay/error.hpp"

namespace dynalay {
namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void append(std::vector<double>& out, std::span<const double> v) { out.insert(out.end(), v.begin(), v.end()); }

std::span<const double> take(std::span<const double>& src, std::size_t n) {
    if (src.size() < n) throw InputError("flat parameter vector too short");
    auto head = src.first(n);
    src = src.subspan(n);
    return head;
}

DenseMatrix take_matrix(std::span<const double>& src, const DenseMatrix& like) {
    auto s = take(src, like.data().size());
    return DenseMatrix(like.rows(), like.cols(), std::vector<double>(s.begin(), s.end()));
}

Vector take_vector(std::span<const double>& src, std::size_t n) {
    auto s = take(src, n);
    return Vector(s.begin(), s.end());
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

std::string hex_digest_of(const std::vector<double>& values) {
    return fnv1a_hex(std::string_view(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double)));
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !(agent_learning_rate >= 0.0)) throw InputError("learning rates must be >= 0");
    if (batch_size < 1) throw InputError("batch_size must be >= 1");
    if (epochs < 0 || warmup_epochs < 0) throw InputError("epochs must be >= 0");
    if (warmup_epochs > epochs) throw InputError("warmup_epochs must not exceed epochs");
    if (max_steps_per_episode < 1) throw InputError("max_steps_per_episode must be >= 1");
    if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) throw InputError("baseline_decay must lie in [0, 1)");
    if (eval_every < 0) throw InputError("eval_every must be >= 0");
    if (model.state_dim == 0 || model.n_fpi_layers == 0 || model.agent_hidden == 0)
        throw InputError("model dimensions must be positive");
    if (!(model.contraction_target > 0.0 && model.contraction_target < 1.0))
        throw InputError("model.contraction_target must lie in (0, 1)");
    if (!(model.epsilon >= 0.0 && model.epsilon <= 1.0)) throw InputError("model.epsilon must lie in [0, 1]");
    if (!(model.temperature > 0.0)) throw InputError("model.temperature must be > 0");
    fpi.validate();
    reward.validate();
}

// ---- MainModel --------------------------------------------------------------

std::vector<double> MainModel::flat_params() const {
    std::vector<double> out;
    append(out, encoder.w.data());
    append(out, encoder.b);
    for (const FpiLayer& l : fpi_layers) {
        append(out, l.w_z().data());
        append(out, l.w_x().data());
        append(out, l.b());
    }
    append(out, head.w.data());
    append(out, head.b);
    return out;
}

MainModel MainModel::with_flat_params(std::span<const double> params) const {
    MainModel out{DenseLayer{take_matrix(params, encoder.w), take_vector(params, encoder.b.size()), encoder.act},
                  {},
                  DenseLayer{}};
    out.fpi_layers.reserve(fpi_layers.size());
    for (const FpiLayer& l : fpi_layers) {
        DenseMatrix wz = take_matrix(params, l.w_z());
        DenseMatrix wx = take_matrix(params, l.w_x());
        Vector b = take_vector(params, l.b().size());
        out.fpi_layers.push_back(enforce_contraction(l.with_params(std::move(wz), std::move(wx), std::move(b))));
    }
    out.head = DenseLayer{take_matrix(params, head.w), take_vector(params, head.b.size()), head.act};
    if (!params.empty()) throw InputError("flat parameter vector too long");
    return out;
}

bool MainModel::all_certified() const noexcept {
    return std::all_of(fpi_layers.begin(), fpi_layers.end(), [](const FpiLayer& l) { return l.is_certified(); });
}

std::string MainModel::digest() const { return hex_digest_of(flat_params()); }

std::string digest(const AgentNet& agent) { return hex_digest_of(agent.flat_params()); }

MainGrad MainGrad::zeros_like(const MainModel& model) {
    MainGrad g{DenseGrad::zeros_like(model.encoder), {}, DenseGrad::zeros_like(model.head)};
    for (const FpiLayer& l : model.fpi_layers) g.fpi.push_back(FpiGrad::zeros_like(l));
    return g;
}

void MainGrad::add(const MainGrad& other) {
    encoder.add(other.encoder);
    for (std::size_t i = 0; i < fpi.size(); ++i) fpi[i].add(other.fpi[i]);
    head.add(other.head);
}

std::vector<double> MainGrad::flat() const {
    std::vector<double> out;
    append(out, encoder.w.data());
    append(out, encoder.b);
    for (const FpiGrad& g : fpi) {
        append(out, g.wz.data());
        append(out, g.wx.data());
        append(out, g.b);
    }
    append(out, head.w.data());
    append(out, head.b);
    return out;
}

MainModel make_main_model(std::size_t input_dim, std::size_t n_classes, const ModelConfig& cfg, std::uint64_t seed) {
    MainModel m{random_dense_layer(input_dim, cfg.state_dim, Activation::Tanh, derive_seed(seed, 1)),
                {},
                random_dense_layer(cfg.state_dim, n_classes, Activation::Identity, derive_seed(seed, 2))};
    for (std::size_t i = 0; i < cfg.n_fpi_layers; ++i)
        m.fpi_layers.push_back(random_fpi_layer(cfg.state_dim, cfg.state_dim, derive_seed(seed, 10 + i),
                                                cfg.fpi_activation, cfg.contraction_target));
    return m;
}

AgentNet make_agent_for(const ModelConfig& cfg, std::uint64_t seed) {
    return make_agent(kObservedActivations, cfg.n_fpi_layers, cfg.agent_hidden, derive_seed(seed, 3), cfg.epsilon,
                      cfg.temperature);
}

CostLedger cost_ledger_for(const MainModel& model) {
    std::vector<std::size_t> dims;
    for (const FpiLayer& l : model.fpi_layers) dims.push_back(l.state_dim());
    return CostLedger::from_dims(dims, model.state_dim());
}

// ---- episodes ---------------------------------------------------------------

EpisodeResult episode_forward(const MainModel& model, const Policy& policy, std::span<const double> x,
                              const TrainConfig& cfg, Rng& rng) {
    const CostLedger ledger = cost_ledger_for(model);
    const int max_steps = cfg.max_steps_per_episode;
    EpisodeResult ep;
    ep.states.push_back(dense_forward(model.encoder, x));

    for (int t = 0; t < max_steps; ++t) {
        EpisodeStep step;
        if (const AgentNet* agent = policy.agent_net()) {
            const Vector& h = ep.states.back();
            step.features = build_agent_features({h, dense_forward(model.head, h)}, cfg.reward.lambda, t, max_steps);
            const Vector probs = agent_forward(*agent, step.features);
            const ActionChoice choice = select_action(probs, agent->epsilon, policy.mode(), rng);
            step.action = choice.action;
            step.log_prob = choice.log_prob;
        } else {
            const auto& path = policy.path();
            step.action = static_cast<std::size_t>(t) < path.size() ? Action::fpi(path[static_cast<std::size_t>(t)])
                                                                    : Action::nop();
        }

        if (step.action.is_nop()) {
            ep.trace.steps.push_back(std::move(step));
            break;
        }
        if (step.action.layer >= model.fpi_layers.size())
            throw InputError("episode_forward: action refers to missing layer " + std::to_string(step.action.layer));
        FixedPointResult fp = fpi_forward(model.fpi_layers[step.action.layer], ep.states.back(), cfg.fpi,
                                          ledger.weight(step.action));
        step.iterations = fp.iterations;
        step.cost_units = fp.cost_units;
        ep.states.push_back(std::move(fp.z_star));
        ep.trace.steps.push_back(std::move(step));
    }
    ep.trace.consecutive_layer_count = static_cast<int>(ep.trace.fpi_actions());
    ep.logits = dense_forward(model.head, ep.states.back());
    return ep;
}

void score_episode(EpisodeResult& ep, std::size_t label, const CostLedger& ledger, const TrainConfig& cfg) {
    EpisodeTrace& tr = ep.trace;
    tr.cross_entropy = cross_entropy(ep.logits, label);
    tr.correct = argmax(ep.logits) == label;
    tr.reward = compute_reward(tr.correct, compute_cost(tr, ledger), tr.consecutive_layer_count, cfg.reward);
    tr.agent_return = cfg.agent_return == AgentReturn::Reward ? tr.reward
                                                              : -total_loss(tr.cross_entropy, tr.reward, cfg.reward);
}

MainGrad main_sample_gradient(const MainModel& model, const EpisodeResult& ep, std::span<const double> x,
                              std::size_t label, const TrainConfig& cfg) {
    MainGrad grad = MainGrad::zeros_like(model);
    DenseLayerVjp head = dense_vjp(model.head, ep.states.back(), cross_entropy_grad(ep.logits, label));
    grad.head = DenseGrad{std::move(head.grad_w), std::move(head.grad_b)};
    Vector g = std::move(head.u_x);

    std::vector<std::size_t> used;
    for (const EpisodeStep& s : ep.trace.steps)
        if (!s.action.is_nop()) used.push_back(s.action.layer);
    if (used.size() + 1 != ep.states.size()) throw InputError("main_sample_gradient: trace and states disagree");

    for (std::size_t k = used.size(); k-- > 0;) {
        const FpiLayer& layer = model.fpi_layers[used[k]];
        GradientBundle b = fpi_backward(layer, ep.states[k + 1], ep.states[k], g, cfg.fpi);
        grad.fpi[used[k]].add(b.params);
        g = std::move(b.grad_x);
    }
    DenseLayerVjp enc = dense_vjp(model.encoder, x, g);
    grad.encoder = DenseGrad{std::move(enc.grad_w), std::move(enc.grad_b)};
    return grad;
}

MainGrad main_batch_gradient(const MainModel& model, const std::vector<EpisodeResult>& episodes,
                             const Dataset& data, std::span<const std::size_t> indices, const TrainConfig& cfg) {
    if (episodes.size() != indices.size()) throw InputError("main_batch_gradient: one episode per index required");
    MainGrad acc = MainGrad::zeros_like(model);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const std::size_t i = indices[k];
        acc.add(main_sample_gradient(model, episodes[k], data.features[i], data.labels[i], cfg));
    }
    return acc;
}

// ---- optimizer --------------------------------------------------------------

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != grad.size()) throw InputError("Optimizer::step: parameter/gradient length mismatch");
    if (kind_ == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
        return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (m_.size() != params.size()) {
        m_.assign(params.size(), 0.0);
        v_.assign(params.size(), 0.0);
        t_ = 0;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
        v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
        params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
}

// ---- evaluation -------------------------------------------------------------

std::vector<double> EvalReport::action_frequencies() const {
    std::vector<double> f(histogram.size(), 0.0);
    if (total_decisions == 0) return f;
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = static_cast<double>(histogram[i]) / static_cast<double>(total_decisions);
    return f;
}

EvalReport evaluate(const MainModel& model, const Policy& policy, const Dataset& data, const TrainConfig& cfg,
                    std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    const CostLedger ledger = cost_ledger_for(model);
    Rng rng(seed);
    EvalReport rep;
    rep.histogram.assign(model.fpi_layers.size() + 1, 0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        EpisodeResult ep = episode_forward(model, policy, data.features[i], cfg, rng);
        score_episode(ep, data.labels[i], ledger, cfg);
        ep.trace.sample_id = i;
        for (const EpisodeStep& s : ep.trace.steps) ++rep.histogram[s.action.index()];
        rep.total_decisions += ep.trace.steps.size();
        correct += ep.trace.correct ? 1 : 0;
        rep.ce_mean += ep.trace.cross_entropy;
        rep.reward_mean += ep.trace.reward;
        rep.cost_mean += compute_cost(ep.trace, ledger);
        rep.traces.push_back(std::move(ep.trace));
    }
    if (data.size() > 0) {
        const double n = static_cast<double>(data.size());
        rep.accuracy = static_cast<double>(correct) / n;
        rep.ce_mean /= n;
        rep.reward_mean /= n;
        rep.cost_mean /= n;
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

// ---- Trainer ----------------------------------------------------------------

Trainer::Trainer(TrainConfig cfg, MainModel model, AgentNet agent)
    : cfg_(std::move(cfg)),
      model_(std::move(model)),
      agent_(std::move(agent)),
      ledger_(cost_ledger_for(model_)),
      main_opt_(cfg_.optimizer, cfg_.learning_rate),
      agent_opt_(cfg_.optimizer, cfg_.agent_learning_rate),
      rng_(derive_seed(cfg_.seed, 4)) {
    cfg_.validate();
    if (agent_.n_actions() != model_.fpi_layers.size() + 1)
        throw InputError("Trainer: agent action count must equal fixed-point layers + 1");
    if (!model_.all_certified()) throw CertificationError("Trainer: model has uncertified fixed-point layers");
}

Trainer::Trainer(TrainConfig cfg, const Dataset& data)
    : Trainer(cfg, make_main_model(data.dim(), data.n_classes, cfg.model, cfg.seed), make_agent_for(cfg.model, cfg.seed)) {}

void Trainer::step_main(const MainGrad& grad) {
    std::vector<double> params = model_.flat_params();
    main_opt_.step(params, grad.flat());
    model_ = model_.with_flat_params(params);
}

void Trainer::step_agent(const std::vector<EpisodeTrace>& traces) {
    double mean_return = 0.0;
    for (const EpisodeTrace& t : traces) mean_return += t.agent_return;
    mean_return /= static_cast<double>(traces.size());
    if (!baseline_init_) {
        baseline_ = mean_return;
        baseline_init_ = true;
    }
    const AgentGrad grad = agent_policy_gradient(agent_, traces, baseline_);
    std::vector<double> params = agent_.flat_params();
    agent_opt_.step(params, grad.flat());
    agent_.assign_flat(params);
    baseline_ = cfg_.baseline_decay * baseline_ + (1.0 - cfg_.baseline_decay) * mean_return;
}

void Trainer::run_epoch(const Dataset& data, const Policy& policy, Updates updates, const std::string& split) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_.engine());

    EpochMetrics m;
    m.split = split;
    m.action_freq.assign(model_.fpi_layers.size() + 1, 0.0);
    std::size_t decisions = 0, correct = 0;
    const bool update_main = updates != Updates::Agent;
    const bool update_agent = updates != Updates::Main;
    const std::size_t bs = static_cast<std::size_t>(cfg_.batch_size);

    for (std::size_t begin = 0, batch = 0; begin < order.size(); begin += bs, ++batch) {
        const std::size_t end = std::min(order.size(), begin + bs);
        try {
            const std::span<const std::size_t> idx(order.data() + begin, end - begin);
            std::vector<EpisodeResult> episodes;
            for (const std::size_t i : idx) {
                EpisodeResult ep = episode_forward(model_, policy, data.features[i], cfg_, rng_);
                score_episode(ep, data.labels[i], ledger_, cfg_);
                if (!std::isfinite(ep.trace.cross_entropy)) throw NumericError("non-finite loss");
                ep.trace.sample_id = i;
                m.ce += ep.trace.cross_entropy;
                m.reward_mean += ep.trace.reward;
                m.cost_mean += compute_cost(ep.trace, ledger_);
                correct += ep.trace.correct ? 1 : 0;
                for (const EpisodeStep& s : ep.trace.steps) m.action_freq[s.action.index()] += 1.0;
                decisions += ep.trace.steps.size();
                episodes.push_back(std::move(ep));
            }
            if (update_main) step_main(main_batch_gradient(model_, episodes, data, idx, cfg_));
            if (update_agent) {
                std::vector<EpisodeTrace> traces;
                for (EpisodeResult& ep : episodes) traces.push_back(std::move(ep.trace));
                step_agent(traces);
            }
        } catch (const NumericError& e) {
            throw NumericError("epoch " + std::to_string(epoch_ + 1) + ", batch " + std::to_string(batch) + ": " +
                               e.what());
        }
    }

    const double n = std::max<double>(1.0, static_cast<double>(data.size()));
    m.ce /= n;
    m.reward_mean /= n;
    m.cost_mean /= n;
    m.accuracy = static_cast<double>(correct) / n;
    if (decisions > 0)
        for (double& f : m.action_freq) f /= static_cast<double>(decisions);
    m.epoch = ++epoch_;
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history_.push_back(std::move(m));
}

namespace {

bool due(int epoch_in_phase, int total, int every) {
    if (epoch_in_phase == total) return true;
    return every > 0 && epoch_in_phase % every == 0;
}

EpochMetrics metrics_from(const EvalReport& r, int epoch, const std::string& split) {
    EpochMetrics m;
    m.epoch = epoch;
    m.split = split;
    m.ce = r.ce_mean;
    m.reward_mean = r.reward_mean;
    m.cost_mean = r.cost_mean;
    m.accuracy = r.accuracy;
    m.action_freq = r.action_frequencies();
    m.wall_seconds = r.wall_seconds;
    return m;
}

} // namespace

void Trainer::train_fixed_path(const Dataset& data, const std::vector<std::size_t>& path, int epochs,
                               const std::string& split) {
    const Policy policy = Policy::fixed(path);
    for (int e = 1; e <= epochs; ++e) {
        run_epoch(data, policy, Updates::Main, split);
        if (val_ && due(e, epochs, cfg_.eval_every))
            history_.push_back(metrics_from(evaluate(model_, policy, *val_, cfg_), epoch_, "val_" + split));
    }
}

void Trainer::pretrain_main(const Dataset& data, int epochs) {
    std::vector<std::size_t> all(model_.fpi_layers.size());
    std::iota(all.begin(), all.end(), 0);
    train_fixed_path(data, all, epochs, "warmup_main");
}

void Trainer::pretrain_agent(const Dataset& data, int epochs) {
    const Policy policy = Policy::agent(agent_, SelectMode::TrainSample);
    for (int e = 1; e <= epochs; ++e) {
        run_epoch(data, policy, Updates::Agent, "warmup_agent");
        if (val_ && due(e, epochs, cfg_.eval_every))
            history_.push_back(metrics_from(
                evaluate(model_, Policy::agent(agent_, SelectMode::EvalGreedy), *val_, cfg_), epoch_, "val_warmup_agent"));
    }
}

void Trainer::train_joint(const Dataset& data, int epochs) {
    const Policy policy = Policy::agent(agent_, SelectMode::TrainSample);
    for (int e = 1; e <= epochs; ++e) {
        run_epoch(data, policy, Updates::Both, "joint");
        if (val_ && due(e, epochs, cfg_.eval_every))
            history_.push_back(
                metrics_from(evaluate(model_, Policy::agent(agent_, SelectMode::EvalGreedy), *val_, cfg_), epoch_,
                             "val_joint"));
    }
}

void Trainer::run(const Dataset& train, const Dataset* val) {
    val_ = val;
    pretrain_main(train, cfg_.warmup_epochs);
    pretrain_agent(train, cfg_.warmup_epochs);
    train_joint(train, cfg_.joint_epochs());
}

Checkpoint Trainer::checkpoint() const { return Checkpoint{cfg_, epoch_, model_, agent_, rng_.state_digest()}; }

MainModel pretrain_main(MainModel model, const Dataset& data, const TrainConfig& cfg) {
    AgentNet agent = make_agent_for(cfg.model, cfg.seed);
    Trainer t(cfg, std::move(model), std::move(agent));
    t.pretrain_main(data, cfg.warmup_epochs);
    return t.model();
}

AgentNet pretrain_agent(const MainModel& frozen, AgentNet agent, const Dataset& data, const TrainConfig& cfg) {
    Trainer t(cfg, frozen, std::move(agent));
    t.pretrain_agent(data, cfg.warmup_epochs);
    return t.agent();
}

JointResult train_joint(MainModel model, AgentNet agent, const Dataset& data, const TrainConfig& cfg) {
    Trainer t(cfg, std::move(model), std::move(agent));
    t.train_joint(data, cfg.joint_epochs());
    return {t.model(), t.agent(), t.history()};
}

// ---- metrics files ----------------------------------------------------------

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& history,
                       std::size_t n_actions) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open " + path.string() + " for writing");
    os << "epoch,split,ce,reward_mean,cost_mean,accuracy";
    for (std::size_t a = 0; a < n_actions; ++a) os << ",freq_" << Action::from_index(a).name();
    os << '\n';
    for (const EpochMetrics& m : history) {
        os << m.epoch << ',' << m.split << ',' << fmt_double(m.ce) << ',' << fmt_double(m.reward_mean) << ','
           << fmt_double(m.cost_mean) << ',' << fmt_double(m.accuracy);
        for (std::size_t a = 0; a < n_actions; ++a)
            os << ',' << fmt_double(a < m.action_freq.size() ? m.action_freq[a] : 0.0);
        os << '\n';
    }
}

void write_timing_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& history) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open " + path.string() + " for writing");
    os << "epoch,split,wall_seconds\n";
    for (const EpochMetrics& m : history) os << m.epoch << ',' << m.split << ',' << fmt_double(m.wall_seconds) << '\n';
}

} // namespace dynalay
