#include "paclab/serialize.hpp"

#include <set>
#include <stdexcept>

namespace paclab {

using nlohmann::json;

json mdp_to_json(const TabularMdp& mdp) {
    json j;
    j["num_states"] = mdp.num_states();
    j["num_actions"] = mdp.num_actions();
    j["discount"] = mdp.discount();
    json rewards = json::array();
    json transitions = json::array();
    for (int s = 0; s < mdp.num_states(); ++s) {
        json rrow = json::array();
        json trow = json::array();
        for (int a = 0; a < mdp.num_actions(); ++a) {
            rrow.push_back(mdp.reward(s, a));
            auto p = mdp.transition_row(s, a);
            trow.push_back(std::vector<double>(p.begin(), p.end()));
        }
        rewards.push_back(std::move(rrow));
        transitions.push_back(std::move(trow));
    }
    j["rewards"] = std::move(rewards);
    j["transitions"] = std::move(transitions);
    return j;
}

TabularMdp mdp_from_json(const json& j) {
    const int S = j.at("num_states").get<int>();
    const int A = j.at("num_actions").get<int>();
    const double gamma = j.at("discount").get<double>();
    if (S <= 0 || A <= 0) throw std::invalid_argument("mdp_from_json: bad dimensions");
    std::vector<double> rewards;
    rewards.reserve(static_cast<std::size_t>(S) * A);
    std::vector<double> transitions;
    transitions.reserve(static_cast<std::size_t>(S) * A * S);
    const auto& rj = j.at("rewards");
    const auto& tj = j.at("transitions");
    if (rj.size() != static_cast<std::size_t>(S) || tj.size() != static_cast<std::size_t>(S)) {
        throw std::invalid_argument("mdp_from_json: table shapes do not match num_states");
    }
    for (int s = 0; s < S; ++s) {
        if (rj[s].size() != static_cast<std::size_t>(A) || tj[s].size() != static_cast<std::size_t>(A)) {
            throw std::invalid_argument("mdp_from_json: table shapes do not match num_actions");
        }
        for (int a = 0; a < A; ++a) {
            rewards.push_back(rj[s][a].get<double>());
            const auto& row = tj[s][a];
            if (row.size() != static_cast<std::size_t>(S)) {
                throw std::invalid_argument("mdp_from_json: transition row has wrong length");
            }
            for (int k = 0; k < S; ++k) transitions.push_back(row[k].get<double>());
        }
    }
    return TabularMdp(S, A, std::move(transitions), std::move(rewards), gamma);
}

json schedule_dump(const StageSchedule& schedule, std::int64_t prefix) {
    json j;
    j["H"] = schedule.H();
    j["B"] = schedule.B();
    j["iota"] = schedule.iota();
    j["N0"] = schedule.N0();
    j["N1"] = schedule.N1();
    j["J_check"] = schedule.num_type1_stages();
    j["J_bar"] = schedule.num_type2_stages();
    j["variant"] = schedule.variant() == Variant::MultiStage ? "multistage" : "advantage";
    j["d"] = schedule.d_values(prefix);
    j["L_check"] = schedule.type1_triggers(prefix);
    j["L_bar"] = schedule.type2_triggers(prefix);
    return j;
}

json agent_spec_to_json(const AgentSpec& spec) {
    json j;
    j["kind"] = to_string(spec.kind);
    j["bonus_scale"] = spec.bonus_scale;
    j["c1"] = spec.c1;
    j["c10"] = spec.c10;
    j["cap_n0"] = spec.cap_n0 ? json(*spec.cap_n0) : json(nullptr);
    j["cap_n1"] = spec.cap_n1 ? json(*spec.cap_n1) : json(nullptr);
    if (spec.schedule_epsilon) j["schedule_epsilon"] = *spec.schedule_epsilon;
    if (spec.horizon_override) j["horizon_override"] = *spec.horizon_override;
    if (spec.b_override) j["b_override"] = *spec.b_override;
    if (spec.n0_override) j["n0_override"] = *spec.n0_override;
    if (spec.n1_override) j["n1_override"] = *spec.n1_override;
    j["last_coeff"] = spec.last_coeff;
    j["optimism"] = spec.optimism;
    return j;
}

AgentSpec agent_spec_from_json(const json& j) {
    static const std::set<std::string> known = {
        "kind", "bonus_scale", "c1", "c10", "cap_n0", "cap_n1", "schedule_epsilon",
        "horizon_override", "b_override", "n0_override", "n1_override", "last_coeff", "optimism"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw std::invalid_argument("agent spec: unknown key '" + it.key() + "'");
        }
    }
    AgentSpec spec;
    if (j.contains("kind")) spec.kind = agent_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("bonus_scale")) spec.bonus_scale = j.at("bonus_scale").get<double>();
    if (j.contains("c1")) spec.c1 = j.at("c1").get<double>();
    if (j.contains("c10")) spec.c10 = j.at("c10").get<double>();
    if (j.contains("cap_n0")) {
        spec.cap_n0 = j.at("cap_n0").is_null() ? std::nullopt
                                               : std::optional<std::int64_t>(j.at("cap_n0").get<std::int64_t>());
    }
    if (j.contains("cap_n1")) {
        spec.cap_n1 = j.at("cap_n1").is_null() ? std::nullopt
                                               : std::optional<std::int64_t>(j.at("cap_n1").get<std::int64_t>());
    }
    if (j.contains("schedule_epsilon")) spec.schedule_epsilon = j.at("schedule_epsilon").get<double>();
    if (j.contains("horizon_override")) spec.horizon_override = j.at("horizon_override").get<int>();
    if (j.contains("b_override")) spec.b_override = j.at("b_override").get<double>();
    if (j.contains("n0_override")) spec.n0_override = j.at("n0_override").get<std::int64_t>();
    if (j.contains("n1_override")) spec.n1_override = j.at("n1_override").get<std::int64_t>();
    if (j.contains("last_coeff")) spec.last_coeff = j.at("last_coeff").get<double>();
    if (j.contains("optimism")) spec.optimism = j.at("optimism").get<double>();
    return spec;
}

json run_config_to_json(const RunConfig& config) {
    json j;
    j["env"] = config.env;
    j["gamma"] = config.gamma;
    j["agent"] = agent_spec_to_json(config.agent);
    j["epsilon"] = config.epsilon;
    j["p"] = config.p;
    j["steps"] = config.step_budget;
    j["seed"] = config.seed;
    j["oracle_tol"] = config.oracle_tol;
    j["diagnostics"] = config.diagnostics;
    j["validate"] = config.validate;
    j["window"] = config.window;
    return j;
}

RunConfig run_config_from_json(const json& j) {
    static const std::set<std::string> known = {"env",        "gamma",    "agent",    "epsilon",
                                                "p",          "steps",    "seed",     "oracle_tol",
                                                "diagnostics", "validate", "window"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw std::invalid_argument("run config: unknown key '" + it.key() + "'");
        }
    }
    RunConfig config;
    if (j.contains("env")) config.env = j.at("env").get<std::string>();
    if (j.contains("gamma")) config.gamma = j.at("gamma").get<double>();
    if (j.contains("agent")) config.agent = agent_spec_from_json(j.at("agent"));
    if (j.contains("epsilon")) config.epsilon = j.at("epsilon").get<double>();
    if (j.contains("p")) config.p = j.at("p").get<double>();
    if (j.contains("steps")) config.step_budget = j.at("steps").get<std::int64_t>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("oracle_tol")) config.oracle_tol = j.at("oracle_tol").get<double>();
    if (j.contains("diagnostics")) config.diagnostics = j.at("diagnostics").get<bool>();
    if (j.contains("validate")) config.validate = j.at("validate").get<bool>();
    if (j.contains("window")) config.window = j.at("window").get<std::int64_t>();
    return config;
}

json run_result_to_json(const RunResult& result) {
    json j;
    j["schema"] = result.schema;
    j["steps"] = result.steps;
    j["sample_complexity"] = result.sample_complexity;
    j["window_size"] = result.window_size;
    json windows = json::array();
    for (const auto& w : result.windows) {
        windows.push_back({{"suboptimal", w.suboptimal}, {"updates", w.updates}});
    }
    j["windows"] = std::move(windows);
    j["type1_updates"] = result.type1_updates;
    j["type2_updates"] = result.type2_updates;
    j["both_updates"] = result.both_updates;
    j["reference_sets"] = result.reference_sets;
    j["other_updates"] = result.other_updates;
    j["policy_changes"] = result.policy_changes;
    j["final_sup_error"] = result.final_sup_error;
    j["clipped_pseudo_regret_sum"] = result.clipped_pseudo_regret_sum;
    j["min_optimism_gap"] = result.min_optimism_gap;
    j["invariant_violations"] = result.invariant_violations;
    j["final_v"] = result.final_v;
    j["final_policy"] = result.final_policy;
    j["final_window_state_visits"] = result.final_window_state_visits;
    j["final_window_clean"] = result.final_window_clean;
    j["diag_horizon"] = result.diag_horizon;
    j["wall_time_sec"] = result.wall_time_sec;
    return j;
}

std::string json_to_string(const json& j, int indent) { return j.dump(indent); }

}  // namespace paclab
