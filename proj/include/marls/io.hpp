#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "marls/mamdp.hpp"
#include "marls/submodular.hpp"

namespace marls::io {

using json = nlohmann::json;

/// Coverage: {"num_objects": M, "covers": [{"state", "action", "objects"}]} ("kind" optional).
/// Facility location: {"kind": "facility_location", "pairs": [{"state", "action"}], "weights": [[...]]}.
/// Modular: {"kind": "modular", "values": [{"state", "action", "value"}]}.
OraclePtr oracle_from_json(const json& j);
json oracle_to_json(const SetFunctionOracle& oracle);
OraclePtr load_oracle(const std::filesystem::path& path);
/// Pairs the oracle's file representation mentions, sorted.
std::vector<GroundPair> declared_pairs(const SetFunctionOracle& oracle);

/// Instance document:
/// {"num_states", "num_actions", "num_agents", "horizon",
///  "transitions": [i][h][s][a][s'], "initial_state": [...],
///  "oracle": {...} | "oracle_file": "path relative to the instance file"}
MamdpSpec instance_from_json(const json& j, const std::filesystem::path& base_dir = {});
json instance_to_json(const MamdpSpec& spec);
MamdpSpec load_instance(const std::filesystem::path& path);

/// {"action_table": [i][h][s]}; a bare nested array is also accepted.
DecomposablePolicy policy_from_json(const json& j);
json policy_to_json(const DecomposablePolicy& policy);
DecomposablePolicy load_policy(const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);

UnvisitedFallback parse_fallback(const std::string& name);
std::string to_string(UnvisitedFallback fallback);

}  // namespace marls::io
