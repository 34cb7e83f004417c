#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynalay/data.hpp"
#include "dynalay/trainer.hpp"

namespace dynalay {

/// Where training and test data come from.
struct DataSpec {
    std::string kind = "two_moons";  ///< two_moons | hard_easy | csv
    std::size_t n = 1000;
    std::size_t test_n = 1000;
    double noise = 0.15;
    double margin_easy = 1.0;
    double margin_hard = 0.05;
    double hard_fraction = 0.5;
    double stripe_width = 0.5;
    std::uint64_t seed = 0;
    std::string train_csv;
    std::string test_csv;

    friend bool operator==(const DataSpec&, const DataSpec&) = default;
};

struct DataSplit {
    Dataset train;
    Dataset test;
};

/// Generated kinds draw the test split from a seed derived from `seed`.
DataSplit load_data(const DataSpec& spec);

struct PresetSpec {
    std::string name;
    std::vector<std::uint64_t> seeds;
    std::vector<double> lambdas;

    friend bool operator==(const PresetSpec&, const PresetSpec&) = default;
};

/// Everything the CLI reads from a config file.
struct RunConfig {
    TrainConfig train;
    DataSpec data;
    PresetSpec preset;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Keys absent from `j` keep their value in `base`; unknown keys and wrong
/// types throw InputError.
TrainConfig train_config_from_json(const nlohmann::json& j, const TrainConfig& base = {});

nlohmann::json to_json(const DataSpec& spec);
DataSpec data_spec_from_json(const nlohmann::json& j, const DataSpec& base = {});

nlohmann::json to_json(const RunConfig& cfg);
/// Top level holds the TrainConfig keys plus optional "data" and "preset" objects.
RunConfig run_config_from_json(const nlohmann::json& j, const RunConfig& base = {});

/// Parses a JSON file; syntax errors become FormatError with line:column.
nlohmann::json read_json_file(const std::filesystem::path& path);
RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base = {});

std::string to_string(OptimizerKind k);
std::string to_string(AgentReturn r);
std::string to_string(Z0Policy p);

} // namespace dynalay
