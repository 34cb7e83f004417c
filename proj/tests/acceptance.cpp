// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 7 12     run a subset

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "dynalay/checkpoint.hpp"
#include "dynalay/cli.hpp"
#include "dynalay/config.hpp"
#include "dynalay/fpi_engine.hpp"
#include "dynalay/presets.hpp"
#include "dynalay/rng.hpp"
#include "dynalay/trainer.hpp"
#include "oracles.hpp"

using namespace dynalay;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string join(const std::vector<double>& v, const char* f = "%.4f") {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt(f, x);
    return s;
}

// ---- 1: convergence on an affine contraction --------------------------------

Outcome c1_convergence() {
    const FpiLayer layer(DenseMatrix::identity(2).scaled(0.5), DenseMatrix(2, 1), Vector{1.0, 1.0},
                         Activation::Identity);
    FpiConfig cfg;
    cfg.forward_tol = 1e-8;
    cfg.max_iter = 100;
    const FixedPointResult r = fpi_forward(layer, Vector{0.0}, cfg);

    DenseMatrix a = DenseMatrix::identity(2);
    a(0, 0) = a(1, 1) = 0.5;
    const Vector want = oracle::solve(a, {1.0, 1.0});
    const double err = oracle::dist(r.z_star, want);
    double worst_ratio = 0.0;
    for (std::size_t k = 1; k < r.abs_residuals.size(); ++k)
        worst_ratio = std::max(worst_ratio, r.abs_residuals[k] / r.abs_residuals[k - 1]);
    const bool ok = err <= 1e-6 && r.iterations <= 40 && worst_ratio <= 0.5 + 1e-6;
    return {ok, fmt("|z-z*|=%.2e iters=%d worst residual ratio=%.6f", err, r.iterations, worst_ratio)};
}

// ---- 2: uniqueness across initializations -----------------------------------

Outcome c2_uniqueness() {
    FpiConfig zeros, copy;
    zeros.forward_tol = copy.forward_tol = 1e-10;
    zeros.max_iter = copy.max_iter = 1000;
    copy.z0_policy = Z0Policy::CopyInput;
    Rng rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t d = 1 + rng.index(16);
        const FpiLayer l = random_fpi_layer(d, d, 1000 + i, Activation::Tanh, 0.9, 3.0);
        Vector x(d);
        for (double& v : x) v = rng.normal(0.0, 2.0);
        worst = std::max(worst, oracle::dist(fpi_forward(l, x, zeros).z_star, fpi_forward(l, x, copy).z_star));
    }
    return {worst <= 1e-8, fmt("max |z*_zeros - z*_copy| = %.2e over 100 layers", worst)};
}

// ---- 3: implicit gradients against unrolled and finite differences ----------

struct Blocks {
    Vector wz, wx, b, x;
};

Blocks blocks_of(const GradientBundle& g) {
    const auto wz = g.params.wz.data(), wx = g.params.wx.data();
    return {Vector(wz.begin(), wz.end()), Vector(wx.begin(), wx.end()), g.params.b, g.grad_x};
}

Outcome c3_gradients() {
    FpiConfig cfg;
    cfg.forward_tol = 1e-10;
    cfg.backward_tol = 1e-10;
    cfg.max_iter = 2000;
    Rng rng(33);
    double worst_unrolled = 0.0, worst_fd = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = 2 + rng.index(11), m = 1 + rng.index(6);
        const FpiLayer layer = random_fpi_layer(d, m, 5000 + t, Activation::Tanh, 0.9, 2.0);
        Vector x(m), g(d);
        for (double& v : x) v = rng.normal();
        for (double& v : g) v = rng.normal();

        const FixedPointResult fp = fpi_forward(layer, x, cfg);
        const Blocks imp = blocks_of(fpi_backward(layer, fp.z_star, x, g, cfg));
        const Blocks unr = blocks_of(unrolled_backward_oracle(layer, x, Vector(d, 0.0), 200, g));

        // loss(θ) = g·z*(θ), with z* solved tightly by the test-side iteration.
        auto loss_of = [&](const DenseMatrix& wz, const DenseMatrix& wx, const Vector& b, const Vector& xx) {
            const FpiLayer l(wz, wx, b, Activation::Tanh, 0.999999);
            const Vector z = oracle::tight_fixed_point(l, xx);
            double s = 0;
            for (std::size_t i = 0; i < d; ++i) s += g[i] * z[i];
            return s;
        };
        auto vec_of = [](std::span<const double> s) { return Vector(s.begin(), s.end()); };
        const double h = 1e-6;
        Blocks fd;
        fd.wz = oracle::central_diff(
            [&](const Vector& p) { return loss_of(DenseMatrix(d, d, p), layer.w_x(), layer.b(), x); },
            vec_of(layer.w_z().data()), h);
        fd.wx = oracle::central_diff(
            [&](const Vector& p) { return loss_of(layer.w_z(), DenseMatrix(d, m, p), layer.b(), x); },
            vec_of(layer.w_x().data()), h);
        fd.b = oracle::central_diff([&](const Vector& p) { return loss_of(layer.w_z(), layer.w_x(), p, x); }, layer.b(), h);
        fd.x = oracle::central_diff([&](const Vector& p) { return loss_of(layer.w_z(), layer.w_x(), layer.b(), p); }, x, h);

        for (auto [got, u, f] : {std::tuple{&imp.wz, &unr.wz, &fd.wz}, std::tuple{&imp.wx, &unr.wx, &fd.wx},
                                 std::tuple{&imp.b, &unr.b, &fd.b}, std::tuple{&imp.x, &unr.x, &fd.x}}) {
            worst_unrolled = std::max(worst_unrolled, oracle::rel_err(*got, *u));
            worst_fd = std::max(worst_fd, oracle::rel_err(*got, *f));
        }
    }
    return {worst_unrolled <= 1e-5 && worst_fd <= 1e-4,
            fmt("worst relative error: unrolled %.2e, finite differences %.2e (50 layers, 4 blocks)", worst_unrolled,
                worst_fd)};
}

// ---- 4: certification persists through training -----------------------------

Outcome c4_certification() {
    TrainConfig cfg;
    cfg.batch_size = 20;
    cfg.learning_rate = 0.05;
    cfg.epochs = cfg.warmup_epochs = 10;  // 1000 / 20 × 10 = 500 steps
    const Dataset data = gen_two_moons(1000, 0.15, 4);
    Trainer t(cfg, data);
    t.pretrain_main(data, 10);

    double worst_gap = -1.0, worst_bound = 0.0;
    bool all_cert = t.model().all_certified();
    for (std::size_t i = 0; i < t.model().fpi_layers.size(); ++i) {
        const FpiLayer& l = t.model().fpi_layers[i];
        const double mc = oracle::monte_carlo_lipschitz(l, 1000, 40 + static_cast<unsigned>(i));
        worst_gap = std::max(worst_gap, mc - l.certified_bound());
        worst_bound = std::max(worst_bound, l.certified_bound());
        all_cert = all_cert && l.certified_bound() <= l.contraction_target() + kCertificationSlack;
    }
    return {all_cert && worst_gap <= 1e-12,
            fmt("500 steps; max bound %.6f; max(MC ratio - bound) = %.3e", worst_bound, worst_gap)};
}

// ---- 5: batch gradient is the sum of per-sample gradients --------------------

Outcome c5_accumulation() {
    TrainConfig cfg;
    const Dataset data = gen_two_moons(200, 0.15, 5);
    const MainModel model = make_main_model(2, 2, cfg.model, 5);
    const AgentNet agent = make_agent_for(cfg.model, 5);
    Rng rng(55);
    double worst = 0.0;
    for (int b = 0; b < 20; ++b) {
        const std::vector<std::size_t> idx{rng.index(data.size()), rng.index(data.size())};
        std::vector<EpisodeResult> eps;
        for (std::size_t i : idx) eps.push_back(episode_forward(model, Policy::agent(agent, SelectMode::TrainSample),
                                                                data.features[i], cfg, rng));
        const auto batch = main_batch_gradient(model, eps, data, idx, cfg).flat();
        auto g0 = main_sample_gradient(model, eps[0], data.features[idx[0]], data.labels[idx[0]], cfg).flat();
        const auto g1 = main_sample_gradient(model, eps[1], data.features[idx[1]], data.labels[idx[1]], cfg).flat();
        for (std::size_t k = 0; k < g0.size(); ++k) g0[k] += g1[k];
        worst = std::max(worst, oracle::rel_err(batch, g0));
    }
    return {worst <= 1e-12, fmt("max relative difference %.2e over 20 batches", worst)};
}

// ---- 6: isolation ------------------------------------------------------------

Outcome c6_isolation() {
    const Dataset data = gen_two_moons(400, 0.15, 6);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.agent_learning_rate = 0.05;
    Trainer a(cfg, data);
    const std::string main_before = a.model().digest(), agent_before_a = digest(a.agent());
    a.train_joint(data, 1);
    const bool main_kept = a.model().digest() == main_before;
    const bool agent_moved = digest(a.agent()) != agent_before_a;

    cfg.learning_rate = 0.05;
    cfg.agent_learning_rate = 0.0;
    Trainer b(cfg, data);
    const std::string agent_before = digest(b.agent()), main_before_b = b.model().digest();
    b.train_joint(data, 1);
    const bool agent_kept = digest(b.agent()) == agent_before;
    const bool main_moved = b.model().digest() != main_before_b;
    return {main_kept && agent_kept && agent_moved && main_moved,
            fmt("main lr 0: main digest %s, agent %s; agent lr 0: agent digest %s, main %s",
                main_kept ? "unchanged" : "CHANGED", agent_moved ? "updated" : "static",
                agent_kept ? "unchanged" : "CHANGED", main_moved ? "updated" : "static")};
}

// ---- 7-11: training experiments ----------------------------------------------

Outcome c7_task_performance() {
    const ExperimentPreset p = make_preset(PresetKind::TwoMoons);
    std::vector<double> acc;
    for (std::uint64_t s : p.seeds) acc.push_back(train_and_evaluate(p.config, s).test.accuracy);
    const double med = median(acc);
    return {med >= 0.95 && p.config.train.epochs <= 200,
            fmt("median test accuracy %.4f over %zu seeds, %d epochs [%s]", med, acc.size(), p.config.train.epochs,
                join(acc).c_str())};
}

Outcome c8_adaptive_compute() {
    const ExperimentPreset p = make_preset(PresetKind::HardEasyMix);
    std::vector<double> gaps;
    std::string cells;
    for (std::uint64_t s : p.seeds) {
        const SeedRun run = train_and_evaluate(p.config, s);
        RunConfig c = p.config;
        c.data.seed = s;
        const DifficultySplit d = split_by_difficulty(run.test, load_data(c.data).test);
        gaps.push_back(d.relative_gap());
        cells += fmt(" (easy %.3f hard %.3f)", d.fpi_per_easy, d.fpi_per_hard);
    }
    const double med = median(gaps);
    return {med >= 0.2, fmt("median relative gap %.3f; FPI actions per sample:%s", med, cells.c_str())};
}

Outcome c9_lambda_pressure() {
    const ExperimentPreset p = make_preset(PresetKind::LambdaSweep);
    std::vector<double> rho;
    std::string cells;
    for (std::uint64_t s : p.seeds) {
        std::vector<double> cost;
        for (double lambda : p.lambdas) {
            RunConfig c = p.config;
            c.train.reward.lambda = lambda;
            cost.push_back(train_and_evaluate(c, s).test.cost_mean);
        }
        rho.push_back(spearman(p.lambdas, cost));
        cells += " [" + join(cost, "%.2f") + "]";
    }
    const double med = median(rho);
    return {med <= 0.0, fmt("median Spearman %.3f; mean cost per lambda:%s", med, cells.c_str())};
}

Outcome c10_ablation() {
    const ExperimentPreset p = make_preset(PresetKind::FpiAblation);
    const auto cells = run_fpi_ablation(p);
    const int n_models = static_cast<int>(p.config.train.model.n_fpi_layers) + 1;
    std::vector<double> mean(static_cast<std::size_t>(n_models), 0.0);
    std::vector<int> count(static_cast<std::size_t>(n_models), 0);
    for (const AblationCell& c : cells) {
        mean[static_cast<std::size_t>(c.model)] += c.test_accuracy;
        ++count[static_cast<std::size_t>(c.model)];
    }
    bool enough = true;
    for (int m = 0; m < n_models; ++m) {
        mean[static_cast<std::size_t>(m)] /= count[static_cast<std::size_t>(m)];
        enough = enough && count[static_cast<std::size_t>(m)] >= 10;
    }
    const double m0 = mean.front(), m3 = mean.back();
    return {enough && m3 >= m0 - 0.01,
            fmt("mean test accuracy per model [%s], %d seeds each; strict improvement 3 over 0: %s",
                join(mean).c_str(), count.front(), m3 > m0 ? "yes" : "no")};
}

Outcome c11_reward_trend() {
    const int window = 20, agent_epochs = 40;
    const ExperimentPreset p = make_preset(PresetKind::HardEasyMix);
    int rising = 0;
    std::string cells;
    for (std::uint64_t s : p.seeds) {
        RunConfig c = p.config;
        c.train.seed = c.data.seed = s;
        const DataSplit data = load_data(c.data);
        Trainer t(c.train, data.train);
        t.pretrain_main(data.train, c.train.warmup_epochs);
        t.pretrain_agent(data.train, agent_epochs);
        std::vector<double> r;
        for (const EpochMetrics& m : t.history())
            if (m.split == "warmup_agent") r.push_back(m.reward_mean);
        const double first = std::accumulate(r.begin(), r.begin() + window, 0.0) / window;
        const double last = std::accumulate(r.end() - window, r.end(), 0.0) / window;
        rising += last >= first ? 1 : 0;
        cells += fmt(" %.4f->%.4f", first, last);
    }
    return {rising >= 4, fmt("%d of %zu seeds non-decreasing (20-epoch means, first->last):%s", rising,
                             p.seeds.size(), cells.c_str())};
}

// ---- 12-13: determinism and wall-clock logging -------------------------------

std::string file_digest(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return fnv1a_hex(ss.str());
}

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / ("dynalay_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

std::filesystem::path golden_run(const std::filesystem::path& dir, const std::string& tag) {
    const auto cfg = dir / "config.json";
    std::ofstream(cfg) << R"({"epochs": 6, "warmup_epochs": 2, "seed": 12, "optimizer": "adam",
                              "data": {"kind": "two_moons", "n": 300, "test_n": 200, "seed": 12}})";
    std::ostringstream log, err;
    if (cli::cmd_train(cfg, dir / tag, log, err) != 0) throw std::runtime_error("train failed: " + err.str());
    return dir / tag;
}

Outcome c12_determinism() {
    const auto dir = scratch_dir();
    const auto a = golden_run(dir, "a"), b = golden_run(dir, "b");
    const std::string da = file_digest(a / "metrics.csv"), db = file_digest(b / "metrics.csv");
    const bool ckpt_same = file_digest(a / "checkpoint.json") == file_digest(b / "checkpoint.json");
    std::filesystem::remove_all(dir);
    return {da == db && ckpt_same, fmt("metrics digests %s / %s, checkpoints %s", da.c_str(), db.c_str(),
                                       ckpt_same ? "identical" : "differ")};
}

Outcome c13_out_of_scope() {
    const auto dir = scratch_dir();
    const auto a = golden_run(dir, "a");
    std::ifstream metrics(a / "metrics.csv"), timing(a / "timing.csv");
    std::string mh, th;
    std::getline(metrics, mh);
    std::getline(timing, th);
    std::filesystem::remove_all(dir);
    const bool ok = th == "epoch,split,wall_seconds" && mh.find("wall") == std::string::npos;
    return {ok, "image/text benchmarks and accelerator wall-times not reproduced; wall-clock logged to timing.csv only"};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;  // 0: no runtime bound
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "fixed-point convergence", c1_convergence, 1.0},
        {2, "uniqueness of the fixed point", c2_uniqueness, 10.0},
        {3, "implicit gradient correctness", c3_gradients, 60.0},
        {4, "contraction certification under training", c4_certification, 0.0},
        {5, "gradient accumulation linearity", c5_accumulation, 0.0},
        {6, "main/agent isolation", c6_isolation, 0.0},
        {7, "two-moons task performance", c7_task_performance, 300.0},
        {8, "adaptive compute on hard samples", c8_adaptive_compute, 0.0},
        {9, "lambda cost pressure", c9_lambda_pressure, 0.0},
        {10, "fixed-point ablation floor", c10_ablation, 0.0},
        {11, "agent reward trend", c11_reward_trend, 0.0},
        {12, "run-to-run determinism", c12_determinism, 0.0},
        {13, "out-of-scope results recorded", c13_out_of_scope, 0.0},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : all) {
        if (!only.empty() && !only.contains(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0 && secs > c.budget_seconds) {
            o.pass = false;
            o.detail += fmt("; over the %.0f s budget", c.budget_seconds);
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s criterion %2d  %-42s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
