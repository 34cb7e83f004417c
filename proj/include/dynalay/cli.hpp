#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace dynalay::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

/// Warm-up main, warm-up agent, joint training. Writes resolved_config.json,
/// metrics.csv, timing.csv and checkpoint.json into out_dir.
int cmd_train(const std::filesystem::path& config, const std::filesystem::path& out_dir, std::ostream& log,
              std::ostream& err);

/// Greedy evaluation of a checkpoint on the test split described by
/// `data_config` (a data object, or a run config holding one). Writes
/// eval_report.csv, eval_traces.csv, action_frequency.csv/.svg and eval_timing.csv.
int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data_config,
             const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err);

int cmd_preset(const std::string& name, const std::filesystem::path& config, const std::filesystem::path& out_dir,
               std::ostream& log, std::ostream& err);

} // namespace dynalay::cli
