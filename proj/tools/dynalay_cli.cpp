#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dynalay/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dynalay: adaptive fixed-point layers with a compute-aware agent"};
    app.require_subcommand(1);

    std::string config, out, checkpoint, data_config, preset;

    auto* train = app.add_subcommand("train", "warm-up and joint training from a JSON config");
    train->add_option("config", config, "JSON config")->required();
    train->add_option("out", out, "output directory")->required();

    auto* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
    eval->add_option("checkpoint", checkpoint, "checkpoint.json")->required();
    eval->add_option("data_config", data_config, "JSON data description")->required();
    eval->add_option("out", out, "output directory")->required();

    auto* run = app.add_subcommand("preset", "run a named experiment preset");
    run->add_option("name", preset, "two-moons | hard-easy-mix | lambda-sweep | fpi-ablation")->required();
    run->add_option("config", config, "base JSON config")->required();
    run->add_option("out", out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dynalay::cli::kExitInput;
    }

    if (*train) return dynalay::cli::cmd_train(config, out, std::cout, std::cerr);
    if (*eval) return dynalay::cli::cmd_eval(checkpoint, data_config, out, std::cout, std::cerr);
    return dynalay::cli::cmd_preset(preset, config, out, std::cout, std::cerr);
}
