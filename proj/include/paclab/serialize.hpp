#pragma once

#include <string>

#include "paclab/harness.hpp"
#include "paclab/mdp.hpp"
#include "paclab/schedule.hpp"

#include "json.hpp"

namespace paclab {

/// {"num_states", "num_actions", "discount", "rewards": [[..]],
///  "transitions": [[[..]]]} with transitions[s][a][s']. Values round-trip
/// bit-exactly (shortest round-trip double serialization).
nlohmann::json mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const nlohmann::json& j);

/// {H, B, iota, N0, N1, J_check, J_bar, variant, d, L_check, L_bar} with the
/// first `prefix` entries of each sequence.
nlohmann::json schedule_dump(const StageSchedule& schedule, std::int64_t prefix = 50);

nlohmann::json agent_spec_to_json(const AgentSpec& spec);
AgentSpec agent_spec_from_json(const nlohmann::json& j);

nlohmann::json run_config_to_json(const RunConfig& config);
/// Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);

nlohmann::json run_result_to_json(const RunResult& result);

std::string json_to_string(const nlohmann::json& j, int indent = 2);

}  // namespace paclab
