#include "dynalay/presets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "dynalay/checkpoint.hpp"
#include "dynalay/error.hpp"
#include "dynalay/svg.hpp"

namespace dynalay {
namespace {

constexpr std::pair<PresetKind, std::string_view> kNames[] = {
    {PresetKind::TwoMoons, "two-moons"},
    {PresetKind::HardEasyMix, "hard-easy-mix"},
    {PresetKind::LambdaSweep, "lambda-sweep"},
    {PresetKind::FpiAblation, "fpi-ablation"},
};

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
    std::vector<std::uint64_t> s(n);
    std::iota(s.begin(), s.end(), 0);
    return s;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw InputError("cannot open " + p.string() + " for writing");
    return os;
}

std::string cell_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

std::string cell_tag(double lambda, std::uint64_t seed) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "lambda%g_seed%llu", lambda, static_cast<unsigned long long>(seed));
    return buf;
}

void write_cell(const std::filesystem::path& dir, const std::string& tag, const SeedRun& run) {
    write_metrics_csv(dir / ("metrics_" + tag + ".csv"), run.history, run.model.fpi_layers.size() + 1);
    write_timing_csv(dir / ("timing_" + tag + ".csv"), run.history);
}

void write_frequency_csv(const std::filesystem::path& path, const std::vector<double>& freq) {
    auto os = open_out(path);
    os << "action,frequency\n";
    for (std::size_t a = 0; a < freq.size(); ++a) os << Action::from_index(a).name() << ',' << fmt(freq[a]) << '\n';
}

std::vector<double> mean_frequencies(const std::vector<const SeedRun*>& runs) {
    std::vector<double> f;
    for (const SeedRun* r : runs) {
        const auto g = r->test.action_frequencies();
        if (f.empty()) f.assign(g.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) f[i] += g[i] / static_cast<double>(runs.size());
    }
    return f;
}

struct Quartiles {
    double min, q1, median, q3, max;
};

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return {v.front(), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), v.back()};
}

} // namespace

std::string_view preset_name(PresetKind kind) noexcept {
    for (const auto& [k, n] : kNames)
        if (k == kind) return n;
    return "two-moons";
}

std::optional<PresetKind> parse_preset_name(std::string_view name) {
    for (const auto& [k, n] : kNames)
        if (n == name) return k;
    return std::nullopt;
}

RunConfig preset_defaults(PresetKind kind) {
    RunConfig c;
    c.preset.name = std::string(preset_name(kind));
    TrainConfig& t = c.train;
    t.optimizer = OptimizerKind::Adam;
    t.learning_rate = 0.01;
    t.agent_learning_rate = 0.01;
    switch (kind) {
    case PresetKind::TwoMoons:
    case PresetKind::FpiAblation:
        c.data.kind = "two_moons";
        break;
    case PresetKind::HardEasyMix:
    case PresetKind::LambdaSweep:
        c.data.kind = "hard_easy";
        // One layer that may be re-applied, and a cost scale small enough for
        // extra iterations to pay off on hard samples.
        t.model.n_fpi_layers = 1;
        t.reward.beta_cost = 0.002;
        t.agent_return = AgentReturn::Reward;
        break;
    }
    return c;
}

ExperimentPreset make_preset(PresetKind kind, const RunConfig& cfg) {
    ExperimentPreset p{kind, cfg, seed_range(kind == PresetKind::FpiAblation ? 10 : 5), {}};
    if (kind == PresetKind::LambdaSweep) p.lambdas = {0.0, 0.1, 0.5, 1.0};
    if (!cfg.preset.seeds.empty()) p.seeds = cfg.preset.seeds;
    if (!cfg.preset.lambdas.empty()) p.lambdas = cfg.preset.lambdas;
    p.config.preset.name = std::string(preset_name(kind));
    p.config.preset.seeds = p.seeds;
    p.config.preset.lambdas = p.lambdas;
    if (p.seeds.empty()) throw InputError("preset: empty seed list");
    if (kind == PresetKind::LambdaSweep && p.lambdas.empty()) throw InputError("preset: empty lambda list");
    p.config.train.validate();
    return p;
}

SeedRun train_and_evaluate(const RunConfig& cfg, std::uint64_t seed) {
    RunConfig c = cfg;
    c.train.seed = seed;
    c.data.seed = seed;
    const DataSplit data = load_data(c.data);
    Trainer t(c.train, data.train);
    t.run(data.train, &data.test);
    SeedRun r;
    r.seed = seed;
    r.lambda = c.train.reward.lambda;
    r.test = evaluate(t.model(), Policy::agent(t.agent(), SelectMode::EvalGreedy), data.test, c.train);
    r.history = t.history();
    r.model = t.model();
    r.agent = t.agent();
    return r;
}

double DifficultySplit::relative_gap() const noexcept {
    if (fpi_per_easy == 0.0)
        return fpi_per_hard == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (fpi_per_hard - fpi_per_easy) / fpi_per_easy;
}

DifficultySplit split_by_difficulty(const EvalReport& report, const Dataset& data) {
    if (!data.has_difficulty()) throw InputError("split_by_difficulty: dataset has no difficulty tags");
    if (report.traces.size() != data.size()) throw InputError("split_by_difficulty: trace count mismatch");
    DifficultySplit s;
    double n_easy = 0, n_hard = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const EpisodeTrace& t = report.traces[i];
        const bool hard = data.difficulty[t.sample_id] == Difficulty::Hard;
        (hard ? s.fpi_per_hard : s.fpi_per_easy) += static_cast<double>(t.fpi_actions());
        (hard ? s.accuracy_hard : s.accuracy_easy) += t.correct ? 1.0 : 0.0;
        (hard ? n_hard : n_easy) += 1.0;
    }
    if (n_easy > 0) {
        s.fpi_per_easy /= n_easy;
        s.accuracy_easy /= n_easy;
    }
    if (n_hard > 0) {
        s.fpi_per_hard /= n_hard;
        s.accuracy_hard /= n_hard;
    }
    return s;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
        i = j + 1;
    }
    return rank;
}

} // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("spearman: need two equal-length series of length >= 2");
    const auto rx = average_ranks(x), ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double median(std::vector<double> v) {
    if (v.empty()) throw InputError("median of an empty list");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<AblationCell> run_fpi_ablation(const ExperimentPreset& preset) {
    std::vector<AblationCell> cells;
    const int n_models = static_cast<int>(preset.config.train.model.n_fpi_layers) + 1;
    for (int m = 0; m < n_models; ++m) {
        std::vector<std::size_t> path(static_cast<std::size_t>(m));
        std::iota(path.begin(), path.end(), 0);
        for (std::uint64_t seed : preset.seeds) {
            RunConfig c = preset.config;
            c.train.seed = seed;
            c.data.seed = seed;
            const DataSplit data = load_data(c.data);
            Trainer t(c.train, data.train);
            t.train_fixed_path(data.train, path, c.train.epochs, "model" + std::to_string(m));
            const EvalReport r = evaluate(t.model(), Policy::fixed(path), data.test, c.train);
            cells.push_back({m, seed, r.ce_mean, r.accuracy});
        }
    }
    return cells;
}

PresetReport run_preset(const ExperimentPreset& preset, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        auto os = open_out(out_dir / "resolved_config.json");
        os << to_json(preset.config).dump(2) << '\n';
    }
    PresetReport rep;
    rep.kind = preset.kind;

    if (preset.kind == PresetKind::FpiAblation) {
        rep.ablation = run_fpi_ablation(preset);
        {
            auto os = open_out(out_dir / "ablation_runs.csv");
            os << "model,seed,test_ce,test_accuracy\n";
            for (const AblationCell& c : rep.ablation)
                os << c.model << ',' << c.seed << ',' << fmt(c.test_ce) << ',' << fmt(c.test_accuracy) << '\n';
        }
        auto os = open_out(out_dir / "ablation_boxplot.csv");
        auto bars = open_out(out_dir / "ablation_mean_accuracy.csv");
        os << "model,metric,n,mean,min,q1,median,q3,max\n";
        bars << "model,mean_test_accuracy\n";
        const int n_models = static_cast<int>(preset.config.train.model.n_fpi_layers) + 1;
        for (int m = 0; m < n_models; ++m) {
            for (const bool is_ce : {true, false}) {
                const char* metric = is_ce ? "test_ce" : "test_accuracy";
                std::vector<double> v;
                for (const AblationCell& c : rep.ablation)
                    if (c.model == m) v.push_back(is_ce ? c.test_ce : c.test_accuracy);
                const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
                const Quartiles q = quartiles(v);
                os << "model" << m << ',' << metric << ',' << v.size() << ',' << fmt(mean) << ',' << fmt(q.min) << ','
                   << fmt(q.q1) << ',' << fmt(q.median) << ',' << fmt(q.q3) << ',' << fmt(q.max) << '\n';
                if (!is_ce) bars << "model" << m << ',' << fmt(mean) << '\n';
            }
        }
        bars.close();
        export_svg_plot(out_dir / "ablation_mean_accuracy.csv", PlotKind::Histogram,
                        out_dir / "ablation_mean_accuracy.svg");
        return rep;
    }

    const std::vector<double> lambdas =
        preset.kind == PresetKind::LambdaSweep ? preset.lambdas : std::vector<double>{preset.config.train.reward.lambda};
    for (double lambda : lambdas) {
        RunConfig c = preset.config;
        c.train.reward.lambda = lambda;
        for (std::uint64_t seed : preset.seeds) {
            rep.runs.push_back(train_and_evaluate(c, seed));
            const SeedRun& run = rep.runs.back();
            write_cell(out_dir, preset.kind == PresetKind::LambdaSweep ? cell_tag(lambda, seed) : cell_tag(seed), run);
            if (preset.kind == PresetKind::HardEasyMix) {
                RunConfig d = c;
                d.data.seed = seed;
                rep.difficulty.push_back(split_by_difficulty(run.test, load_data(d.data).test));
            }
        }
    }

    {
        auto os = open_out(out_dir / "runs.csv");
        os << "seed,lambda,test_accuracy,test_ce,test_reward_mean,test_cost_mean";
        if (preset.kind == PresetKind::HardEasyMix) os << ",fpi_per_easy,fpi_per_hard,accuracy_easy,accuracy_hard";
        os << '\n';
        for (std::size_t i = 0; i < rep.runs.size(); ++i) {
            const SeedRun& r = rep.runs[i];
            os << r.seed << ',' << fmt(r.lambda) << ',' << fmt(r.test.accuracy) << ',' << fmt(r.test.ce_mean) << ','
               << fmt(r.test.reward_mean) << ',' << fmt(r.test.cost_mean);
            if (preset.kind == PresetKind::HardEasyMix) {
                const DifficultySplit& s = rep.difficulty[i];
                os << ',' << fmt(s.fpi_per_easy) << ',' << fmt(s.fpi_per_hard) << ',' << fmt(s.accuracy_easy) << ','
                   << fmt(s.accuracy_hard);
            }
            os << '\n';
        }
    }

    if (preset.kind == PresetKind::LambdaSweep) {
        auto freq = open_out(out_dir / "lambda_frequencies.csv");
        auto curve = open_out(out_dir / "lambda_cost.csv");
        freq << "lambda,action,frequency,test_accuracy\n";
        curve << "lambda,mean_cost\n";
        for (double lambda : lambdas) {
            std::vector<const SeedRun*> cell;
            for (const SeedRun& r : rep.runs)
                if (r.lambda == lambda) cell.push_back(&r);
            const auto f = mean_frequencies(cell);
            double acc = 0, cost = 0;
            for (const SeedRun* r : cell) {
                acc += r->test.accuracy / static_cast<double>(cell.size());
                cost += r->test.cost_mean / static_cast<double>(cell.size());
            }
            for (std::size_t a = 0; a < f.size(); ++a)
                freq << fmt(lambda) << ',' << Action::from_index(a).name() << ',' << fmt(f[a]) << ',' << fmt(acc)
                     << '\n';
            curve << fmt(lambda) << ',' << fmt(cost) << '\n';
        }
        curve.close();
        export_svg_plot(out_dir / "lambda_cost.csv", PlotKind::Curve, out_dir / "lambda_cost.svg");
    } else {
        std::vector<const SeedRun*> all;
        for (const SeedRun& r : rep.runs) all.push_back(&r);
        write_frequency_csv(out_dir / "action_frequency.csv", mean_frequencies(all));
        export_svg_plot(out_dir / "action_frequency.csv", PlotKind::Histogram, out_dir / "action_frequency.svg");
    }
    return rep;
}

} // namespace dynalay
