#include "dynalay/cli.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "dynalay/checkpoint.hpp"
#include "dynalay/config.hpp"
#include "dynalay/error.hpp"
#include "dynalay/presets.hpp"
#include "dynalay/svg.hpp"

namespace dynalay::cli {
namespace {

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

// Maps the library's error types onto exit codes.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        body();
        return kExitOk;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const CertificationError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

RunConfig read_config(const std::filesystem::path& path, const RunConfig& base = {}) {
    if (!std::filesystem::is_regular_file(path)) throw InputError("config file not found: " + path.string());
    return load_run_config(path, base);
}

} // namespace

int cmd_train(const std::filesystem::path& config, const std::filesystem::path& out_dir, std::ostream& log,
              std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = read_config(config);
        std::filesystem::create_directories(out_dir);
        open_out(out_dir / "resolved_config.json") << to_json(cfg).dump(2) << '\n';

        const DataSplit data = load_data(cfg.data);
        data.train.validate();
        Trainer trainer(cfg.train, data.train);
        trainer.run(data.train, &data.test);

        const std::size_t n_actions = trainer.model().fpi_layers.size() + 1;
        write_metrics_csv(out_dir / "metrics.csv", trainer.history(), n_actions);
        write_timing_csv(out_dir / "timing.csv", trainer.history());
        save_checkpoint(out_dir / "checkpoint.json", trainer.checkpoint());
        log << "trained " << trainer.epoch() << " epochs; outputs in " << out_dir.string() << '\n';
    });
}

int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data_config,
             const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err) {
    return guarded(err, [&] {
        if (!std::filesystem::is_regular_file(checkpoint))
            throw InputError("checkpoint not found: " + checkpoint.string());
        const Checkpoint ckpt = load_checkpoint(checkpoint);
        if (!std::filesystem::is_regular_file(data_config))
            throw InputError("data config not found: " + data_config.string());
        const nlohmann::json j = read_json_file(data_config);
        const DataSpec spec = j.is_object() && j.contains("data") ? run_config_from_json(j).data : data_spec_from_json(j);
        const DataSplit data = load_data(spec);
        if (data.test.dim() != ckpt.main.encoder.input_dim())
            throw InputError("data dimension does not match the checkpoint's encoder");

        const EvalReport rep =
            evaluate(ckpt.main, Policy::agent(ckpt.agent, SelectMode::EvalGreedy), data.test, ckpt.config);
        std::filesystem::create_directories(out_dir);
        const auto freq = rep.action_frequencies();
        {
            auto os = open_out(out_dir / "eval_report.csv");
            os << "metric,value\n"
               << "samples," << data.test.size() << '\n'
               << "accuracy," << fmt(rep.accuracy) << '\n'
               << "ce_mean," << fmt(rep.ce_mean) << '\n'
               << "reward_mean," << fmt(rep.reward_mean) << '\n'
               << "cost_mean," << fmt(rep.cost_mean) << '\n'
               << "total_decisions," << rep.total_decisions << '\n';
            for (std::size_t a = 0; a < freq.size(); ++a)
                os << "freq_" << Action::from_index(a).name() << ',' << fmt(freq[a]) << '\n';
        }
        {
            auto os = open_out(out_dir / "eval_traces.csv");
            os << "sample_id,actions,correct,cross_entropy,reward\n";
            for (const EpisodeTrace& t : rep.traces) {
                os << t.sample_id << ',';
                for (std::size_t s = 0; s < t.steps.size(); ++s) os << (s ? " " : "") << t.steps[s].action.name();
                os << ',' << (t.correct ? 1 : 0) << ',' << fmt(t.cross_entropy) << ',' << fmt(t.reward) << '\n';
            }
        }
        {
            auto os = open_out(out_dir / "action_frequency.csv");
            os << "action,frequency\n";
            for (std::size_t a = 0; a < freq.size(); ++a) os << Action::from_index(a).name() << ',' << fmt(freq[a]) << '\n';
        }
        export_svg_plot(out_dir / "action_frequency.csv", PlotKind::Histogram, out_dir / "action_frequency.svg");
        open_out(out_dir / "eval_timing.csv") << "wall_seconds\n" << fmt(rep.wall_seconds) << '\n';
        log << "accuracy " << rep.accuracy << " over " << data.test.size() << " samples\n";
    });
}

int cmd_preset(const std::string& name, const std::filesystem::path& config, const std::filesystem::path& out_dir,
               std::ostream& log, std::ostream& err) {
    const auto kind = parse_preset_name(name);
    if (!kind) {
        err << "error: unknown preset '" << name << "' (expected two-moons, hard-easy-mix, lambda-sweep, fpi-ablation)\n";
        return kExitInput;
    }
    return guarded(err, [&] {
        const ExperimentPreset preset = make_preset(*kind, read_config(config, preset_defaults(*kind)));
        run_preset(preset, out_dir);
        log << "preset " << name << " done; outputs in " << out_dir.string() << '\n';
    });
}

} // namespace dynalay::cli
