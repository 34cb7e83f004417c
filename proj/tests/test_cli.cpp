#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "dynalay/config.hpp"
#include "dynalay/rng.hpp"

using namespace dynalay;
namespace fs = std::filesystem;

namespace {

// FNV-1a of metrics.csv for kTinyConfig on this toolchain.
constexpr const char* kGoldenMetricsDigest = "6e4816162b66fa40";

constexpr const char* kTinyConfig = R"({
  "epochs": 3, "warmup_epochs": 1, "batch_size": 20, "seed": 5, "learning_rate": 0.05,
  "model": {"state_dim": 5, "n_fpi_layers": 2, "agent_hidden": 4},
  "data": {"kind": "two_moons", "n": 100, "test_n": 60}
})";

fs::path work(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "dynalay_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream s;
    s << is.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Runs the CLI with stderr captured into `err_file`; returns the exit status.
int run(const std::string& args, const fs::path& err_file) {
    const char* exe = std::getenv("DYNALAY_CLI");
    REQUIRE_MESSAGE(exe != nullptr, "DYNALAY_CLI must point at the built binary");
    const std::string cmd = std::string("'") + exe + "' " + args + " >/dev/null 2>" + q(err_file);
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

} // namespace

TEST_CASE("train writes a checkpoint and a resolved config that parses back") {
    const fs::path d = work("train");
    write(d / "cfg.json", kTinyConfig);
    CHECK(run("train " + q(d / "cfg.json") + " " + q(d / "out"), d / "err.txt") == 0);
    for (const char* f : {"resolved_config.json", "metrics.csv", "timing.csv", "checkpoint.json"})
        CHECK_MESSAGE(fs::exists(d / "out" / f), f);
    const RunConfig want = load_run_config(d / "cfg.json");
    CHECK(load_run_config(d / "out" / "resolved_config.json") == want);

    const std::string digest = fnv1a_hex(slurp(d / "out" / "metrics.csv"));
    MESSAGE("metrics digest " << digest);
    CHECK(digest == kGoldenMetricsDigest);
}

TEST_CASE("train is repeatable") {
    const fs::path d = work("repeat");
    write(d / "cfg.json", kTinyConfig);
    REQUIRE(run("train " + q(d / "cfg.json") + " " + q(d / "a"), d / "err.txt") == 0);
    REQUIRE(run("train " + q(d / "cfg.json") + " " + q(d / "b"), d / "err.txt") == 0);
    for (const char* f : {"metrics.csv", "checkpoint.json", "resolved_config.json"})
        CHECK_MESSAGE(slurp(d / "a" / f) == slurp(d / "b" / f), f);
}

TEST_CASE("zero epochs still writes an untrained checkpoint") {
    const fs::path d = work("zero");
    write(d / "cfg.json", R"({"epochs": 0, "warmup_epochs": 0, "model": {"state_dim": 4}, "data": {"n": 40}})");
    CHECK(run("train " + q(d / "cfg.json") + " " + q(d / "out"), d / "err.txt") == 0);
    CHECK(fs::exists(d / "out" / "checkpoint.json"));
}

TEST_CASE("input problems exit with 2 and explain on stderr") {
    const fs::path d = work("errors");
    CHECK(run("train " + q(d / "missing.json") + " " + q(d / "out"), d / "err.txt") == 2);
    CHECK(slurp(d / "err.txt").find("missing.json") != std::string::npos);

    write(d / "typo.json", R"({"epochz": 3})");
    CHECK(run("train " + q(d / "typo.json") + " " + q(d / "out"), d / "err.txt") == 2);
    CHECK(slurp(d / "err.txt").find("epochz") != std::string::npos);

    write(d / "broken.json", "{\n  \"epochs\": 3,\n  oops\n}");
    CHECK(run("train " + q(d / "broken.json") + " " + q(d / "out"), d / "err.txt") == 2);
    CHECK(slurp(d / "err.txt").find("broken.json:3:") != std::string::npos);

    CHECK(run("preset no-such-preset " + q(d / "typo.json") + " " + q(d / "out"), d / "err.txt") == 2);
    CHECK(run("bogus", d / "err.txt") == 2);
    CHECK(run("", d / "err.txt") == 2);
}

TEST_CASE("eval reproduces the report and rejects corrupted checkpoints") {
    const fs::path d = work("eval");
    write(d / "cfg.json", kTinyConfig);
    REQUIRE(run("train " + q(d / "cfg.json") + " " + q(d / "train"), d / "err.txt") == 0);
    const std::string ckpt = q(d / "train" / "checkpoint.json");
    CHECK(run("eval " + ckpt + " " + q(d / "cfg.json") + " " + q(d / "e1"), d / "err.txt") == 0);
    CHECK(run("eval " + ckpt + " " + q(d / "cfg.json") + " " + q(d / "e2"), d / "err.txt") == 0);
    CHECK(slurp(d / "e1" / "eval_report.csv") == slurp(d / "e2" / "eval_report.csv"));
    CHECK(fs::exists(d / "e1" / "action_frequency.svg"));

    std::ifstream is(d / "e1" / "action_frequency.csv");
    std::string line;
    std::getline(is, line);
    double sum = 0;
    while (std::getline(is, line)) sum += std::stod(line.substr(line.find(',') + 1));
    CHECK(std::abs(sum - 1.0) <= 1e-9);

    const std::string text = slurp(d / "train" / "checkpoint.json");
    write(d / "corrupt.json", text.substr(0, text.size() / 3));
    CHECK(run("eval " + q(d / "corrupt.json") + " " + q(d / "cfg.json") + " " + q(d / "e3"), d / "err.txt") == 2);
    CHECK(slurp(d / "err.txt").find("corrupt.json:") != std::string::npos);

    write(d / "wrong_dim.json", R"({"kind": "csv", "train_csv": ")" + (d / "w.csv").string() + "\"}");
    write(d / "w.csv", "f0,f1,f2,label\n1,2,3,0\n");
    CHECK(run("eval " + ckpt + " " + q(d / "wrong_dim.json") + " " + q(d / "e4"), d / "err.txt") == 2);
}

TEST_CASE("numeric failures exit with 3") {
    const fs::path d = work("numeric");
    write(d / "cfg.json", R"({"epochs": 2, "warmup_epochs": 1, "learning_rate": 1e300, "optimizer": "sgd",
        "model": {"state_dim": 4, "n_fpi_layers": 1}, "data": {"n": 40}})");
    CHECK(run("train " + q(d / "cfg.json") + " " + q(d / "out"), d / "err.txt") == 3);
}

TEST_CASE("presets write their reports") {
    const fs::path d = work("preset");
    write(d / "cfg.json", R"({"epochs": 2, "warmup_epochs": 1, "batch_size": 20,
        "model": {"state_dim": 4, "agent_hidden": 4},
        "data": {"n": 60, "test_n": 40}, "preset": {"seeds": [0], "lambdas": [0, 1]}})");
    CHECK(run("preset lambda-sweep " + q(d / "cfg.json") + " " + q(d / "sweep"), d / "err.txt") == 0);
    CHECK(fs::exists(d / "sweep" / "lambda_frequencies.csv"));

    write(d / "abl.json", R"({"epochs": 2, "warmup_epochs": 1, "batch_size": 20,
        "model": {"state_dim": 4}, "data": {"n": 60, "test_n": 40}})");
    CHECK(run("preset fpi-ablation " + q(d / "abl.json") + " " + q(d / "abl"), d / "err.txt") == 0);
    std::ifstream is(d / "abl" / "ablation_runs.csv");
    std::string line;
    std::getline(is, line);
    std::map<std::string, int> per_model;
    while (std::getline(is, line)) ++per_model[line.substr(0, line.find(','))];
    CHECK(per_model.size() == 4);
    for (const auto& [m, n] : per_model) CHECK(n >= 10);
}
