#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "paclab/agents.hpp"
#include "paclab/envs.hpp"
#include "paclab/mdp.hpp"
#include "paclab/schedule.hpp"

namespace paclab {

enum class AgentKind { MultiStage, Advantage, ModelBased, VanillaQ };

const char* to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& name);

struct AgentSpec {
    AgentKind kind = AgentKind::MultiStage;
    double bonus_scale = 1.0;
    double c1 = 1.0;
    double c10 = 1.0;
    std::optional<std::int64_t> cap_n0 = 1'000'000;
    std::optional<std::int64_t> cap_n1 = 10'000;
    /// When set, schedule constants are built from this epsilon instead of the
    /// measurement epsilon (pins the trajectory across measurement sweeps).
    std::optional<double> schedule_epsilon;
    // Direct schedule overrides, applied after the formula build.
    std::optional<int> horizon_override;
    std::optional<double> b_override;
    std::optional<std::int64_t> n0_override;
    std::optional<std::int64_t> n1_override;
    double last_coeff = 4.0;  // advantage bonus tail coefficient
    double optimism = 1.0;    // model-based baseline
};

struct RunConfig {
    std::string env;
    double gamma = 0.9;
    AgentSpec agent;
    double epsilon = 0.1;
    double p = 0.05;
    std::int64_t step_budget = 0;
    std::uint64_t seed = 0;
    double oracle_tol = 1e-10;
    bool diagnostics = true;
    bool validate = false;
    std::int64_t window = 10'000;
    // Debug/output toggles; no effect on the trajectory.
    bool recompute_each_step = false;
    std::string trace_path;   // CSV per-run record when non-empty
    bool trace_per_step = false;
};

struct WindowStats {
    std::int64_t suboptimal = 0;
    std::int64_t updates = 0;
};

struct RunResult {
    std::string schema = "v1";
    std::int64_t steps = 0;
    std::int64_t sample_complexity = 0;
    std::vector<WindowStats> windows;
    std::int64_t window_size = 0;
    std::int64_t type1_updates = 0;
    std::int64_t type2_updates = 0;
    std::int64_t both_updates = 0;
    std::int64_t reference_sets = 0;
    std::int64_t other_updates = 0;
    std::int64_t policy_changes = 0;
    double final_sup_error = 0.0;
    double clipped_pseudo_regret_sum = 0.0;
    double min_optimism_gap = 0.0;  // min over updates of new_q - Q*(s,a)
    std::int64_t invariant_violations = 0;
    ValueFunction final_v;
    Policy final_policy;
    std::vector<std::int64_t> final_window_state_visits;
    bool final_window_clean = false;
    int diag_horizon = 0;  // H used for the clipped pseudo-regret diagnostic
    double wall_time_sec = 0.0;
};

StageSchedule schedule_for(const AgentSpec& spec, double gamma, double epsilon, double p,
                           int num_states, int num_actions);

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, double gamma, double epsilon, double p,
                                  int num_states, int num_actions);

/// clip(phi(s), eps/(8H)) where phi is the pseudo-regret of (v, pi) at s.
double clipped_pseudo_regret_step(const TabularMdp& mdp, const ValueFunction& v, const Policy& pi,
                                  int state, double epsilon, int H);

/// Drives one agent-environment run for the step budget, counting a step as
/// suboptimal when V*(s_t) - V^{pi_t}(s_t) > epsilon with V^{pi_t} evaluated
/// exactly against the true MDP. Deterministic given (config, seed).
RunResult run(const RunConfig& config);

struct SweepRow {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    RunResult result;
};

/// Cartesian product of epsilons x seeds, independent runs (optionally in
/// parallel); rows are handed to on_row as they finish.
std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<double>& epsilons,
                            const std::vector<std::uint64_t>& seeds, int jobs = 1,
                            const std::function<void(const SweepRow&)>& on_row = {});

/// Least-squares slope of log(mean sample complexity) against log(1/epsilon).
/// Needs >= 3 distinct epsilons with nonzero mean counts.
double scaling_slope(const std::vector<SweepRow>& table);

}  // namespace paclab
