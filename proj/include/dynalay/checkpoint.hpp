#pragma once

#include <filesystem>

#include <json.hpp>

#include "dynalay/trainer.hpp"

namespace dynalay {

nlohmann::json to_json(const DenseMatrix& m);
nlohmann::json to_json(const MainModel& model);
nlohmann::json to_json(const AgentNet& agent);
nlohmann::json to_json(const Checkpoint& ckpt);

/// Structural problems throw FormatError naming the offending JSON path.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

/// Doubles are written in shortest round-trip form, so load(save(c)) == c.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Syntax errors throw FormatError with line:column.
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace dynalay
