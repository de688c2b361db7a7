#include "paclab/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace paclab {

const char* to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::MultiStage: return "multistage";
        case AgentKind::Advantage: return "advantage";
        case AgentKind::ModelBased: return "modelbased";
        case AgentKind::VanillaQ: return "vanillaq";
    }
    return "multistage";
}

AgentKind agent_kind_from_string(const std::string& name) {
    if (name == "multistage") return AgentKind::MultiStage;
    if (name == "advantage") return AgentKind::Advantage;
    if (name == "modelbased") return AgentKind::ModelBased;
    if (name == "vanillaq") return AgentKind::VanillaQ;
    throw std::invalid_argument("unknown agent '" + name +
                                "'; expected multistage, advantage, modelbased, or vanillaq");
}

StageSchedule schedule_for(const AgentSpec& spec, double gamma, double epsilon, double p,
                           int num_states, int num_actions) {
    ScheduleParams params;
    params.discount = gamma;
    params.epsilon = spec.schedule_epsilon.value_or(epsilon);
    params.failure_prob = p;
    params.num_states = num_states;
    params.num_actions = num_actions;
    params.variant =
        spec.kind == AgentKind::Advantage ? Variant::MultiStageAdvantage : Variant::MultiStage;
    params.c1 = spec.c1;
    params.c10 = spec.c10;
    params.cap_n0 = spec.cap_n0;
    params.cap_n1 = spec.cap_n1;
    StageSchedule built = StageSchedule::build(params);
    if (spec.horizon_override || spec.b_override || spec.n0_override || spec.n1_override) {
        return StageSchedule(spec.horizon_override.value_or(built.H()),
                             spec.b_override.value_or(built.B()),
                             spec.n0_override.value_or(built.N0()),
                             spec.n1_override.value_or(built.N1()), built.iota(), built.variant());
    }
    return built;
}

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, double gamma, double epsilon, double p,
                                  int num_states, int num_actions) {
    switch (spec.kind) {
        case AgentKind::MultiStage:
        case AgentKind::Advantage: {
            StagedAgentConfig cfg;
            cfg.schedule = schedule_for(spec, gamma, epsilon, p, num_states, num_actions);
            cfg.discount = gamma;
            cfg.bonus_scale = spec.bonus_scale;
            cfg.last_coeff = spec.last_coeff;
            if (spec.kind == AgentKind::MultiStage) {
                return std::make_unique<MultiStageAgent>(num_states, num_actions, std::move(cfg));
            }
            return std::make_unique<MultiStageAdvantageAgent>(num_states, num_actions, std::move(cfg));
        }
        case AgentKind::ModelBased:
            return std::make_unique<ModelBasedAgent>(num_states, num_actions, gamma, spec.optimism);
        case AgentKind::VanillaQ:
            return std::make_unique<VanillaQAgent>(num_states, num_actions, gamma);
    }
    throw std::logic_error("make_agent: unreachable");
}

double clipped_pseudo_regret_step(const TabularMdp& mdp, const ValueFunction& v, const Policy& pi,
                                  int state, double epsilon, int H) {
    if (static_cast<int>(v.size()) != mdp.num_states() ||
        static_cast<int>(pi.size()) != mdp.num_states() || state < 0 ||
        state >= mdp.num_states()) {
        throw std::invalid_argument("clipped_pseudo_regret_step: dimension mismatch");
    }
    const int a = pi[state];
    const double phi =
        v[state] - (mdp.reward(state, a) + mdp.discount() * mdp.expected_value(state, a, v));
    return clip(phi, epsilon / (8.0 * H));
}

namespace {

bool event_touches_q(const UpdateEvent& ev) {
    return ev.kind == UpdateKind::TypeOne || ev.kind == UpdateKind::TypeTwo ||
           ev.kind == UpdateKind::Both || (ev.kind == UpdateKind::None && ev.q_changed);
}

void write_trace_row(std::ofstream& out, std::int64_t step, int state, int action, double reward,
                     const char* kind, std::int64_t suboptimal, std::int64_t cum_suboptimal) {
    out << step << ',' << state << ',' << action << ',' << reward << ',' << kind << ','
        << suboptimal << ',' << cum_suboptimal << '\n';
}

}  // namespace

RunResult run(const RunConfig& config) {
    if (config.step_budget < 0) throw std::invalid_argument("run: step budget must be >= 0");
    if (config.window < 1) throw std::invalid_argument("run: window must be >= 1");
    const auto t_start = std::chrono::steady_clock::now();

    EnvSpec spec = EnvSpec::parse(config.env);
    TabularMdp mdp = spec.build(config.gamma);
    if (!(config.epsilon > 0.0) || config.epsilon > mdp.vmax()) {
        throw std::invalid_argument("run: epsilon must lie in (0, 1/(1-gamma)]");
    }
    // The oracle must be far more accurate than the measured threshold.
    const double tol = std::min(config.oracle_tol, config.epsilon / 100.0);
    OptimalSolution opt = optimal_values(mdp, tol);

    auto agent = make_agent(config.agent, config.gamma, config.epsilon, config.p, mdp.num_states(),
                            mdp.num_actions());
    agent->set_validation(config.validate);
    EnvInstance env(mdp, spec.initial_state(), config.seed, /*stream=*/0);

    RunResult result;
    result.window_size = config.window;
    result.min_optimism_gap = std::numeric_limits<double>::infinity();
    result.final_window_state_visits.assign(mdp.num_states(), 0);

    int diag_h;
    if (config.agent.kind == AgentKind::MultiStage || config.agent.kind == AgentKind::Advantage) {
        diag_h = schedule_for(config.agent, config.gamma, config.epsilon, config.p,
                              mdp.num_states(), mdp.num_actions())
                     .H();
    } else {
        diag_h = horizon(config.gamma, config.epsilon);
    }
    result.diag_horizon = diag_h;

    std::ofstream trace;
    if (!config.trace_path.empty()) {
        trace.open(config.trace_path);
        if (!trace) throw std::runtime_error("run: cannot open trace file " + config.trace_path);
        trace.precision(17);
        trace << "step,state,action,reward,update_kind,suboptimal,cum_suboptimal\n";
    }

    Policy pi = greedy_policy(agent->q_table());
    ValueFunction v_pi = policy_evaluation(mdp, pi, tol);

    const std::int64_t budget = config.step_budget;
    const std::int64_t final_window_start = budget > 0 ? ((budget - 1) / config.window) * config.window : 0;
    std::int64_t harness_violations = 0;

    // Per-window trace aggregation.
    std::int64_t win_subopt = 0;
    int win_last_state = -1, win_last_action = -1;
    double win_reward = 0.0;
    const char* win_last_kind = "none";

    for (std::int64_t t = 0; t < budget; ++t) {
        const std::int64_t w = t / config.window;
        if (w >= static_cast<std::int64_t>(result.windows.size())) result.windows.push_back({});

        const int s = env.current_state();
        const bool subopt = opt.values[s] - v_pi[s] > config.epsilon;
        if (subopt) {
            ++result.sample_complexity;
            ++result.windows[w].suboptimal;
        }
        if (t >= final_window_start) ++result.final_window_state_visits[s];

        const int a = agent->act(s);
        if (config.validate && a != pi[s]) ++harness_violations;

        if (config.diagnostics) {
            result.clipped_pseudo_regret_sum +=
                clipped_pseudo_regret_step(mdp, agent->v_table(), pi, s, config.epsilon, diag_h);
        }

        auto [reward, s_next] = env.step(a);
        UpdateEvent ev = agent->observe(s, a, reward, s_next);

        switch (ev.kind) {
            case UpdateKind::TypeOne: ++result.type1_updates; break;
            case UpdateKind::TypeTwo: ++result.type2_updates; break;
            case UpdateKind::Both: ++result.both_updates; break;
            case UpdateKind::ReferenceSet: break;
            case UpdateKind::None:
                if (ev.q_changed) ++result.other_updates;
                break;
        }
        if (ev.reference_set) ++result.reference_sets;
        if (event_touches_q(ev)) {
            ++result.windows[w].updates;
            if (config.diagnostics) {
                result.min_optimism_gap =
                    std::min(result.min_optimism_gap, ev.new_q - opt.q(ev.state, ev.action));
            }
        }

        if (ev.q_changed || config.recompute_each_step) {
            Policy pi_new = greedy_policy(agent->q_table());
            if (pi_new != pi) {
                pi = std::move(pi_new);
                ++result.policy_changes;
                v_pi = policy_evaluation(mdp, pi, tol);
            } else if (config.recompute_each_step) {
                v_pi = policy_evaluation(mdp, pi, tol);
            }
        }

        if (trace.is_open()) {
            if (config.trace_per_step) {
                write_trace_row(trace, t, s, a, reward, to_string(ev.kind), subopt ? 1 : 0,
                                result.sample_complexity);
            } else {
                win_subopt += subopt ? 1 : 0;
                win_last_state = s;
                win_last_action = a;
                win_reward += reward;
                if (ev.kind != UpdateKind::None) win_last_kind = to_string(ev.kind);
                if ((t + 1) % config.window == 0 || t + 1 == budget) {
                    write_trace_row(trace, t, win_last_state, win_last_action, win_reward,
                                    win_last_kind, win_subopt, result.sample_complexity);
                    win_subopt = 0;
                    win_reward = 0.0;
                    win_last_kind = "none";
                }
            }
        }
    }

    result.steps = budget;
    result.final_v = agent->v_table();
    result.final_policy = pi;
    for (int s = 0; s < mdp.num_states(); ++s) {
        result.final_sup_error =
            std::max(result.final_sup_error, std::abs(result.final_v[s] - opt.values[s]));
    }
    result.final_window_clean =
        budget > 0 && result.windows.back().suboptimal == 0;
    result.invariant_violations = agent->invariant_violations() + harness_violations;
    if (!std::isfinite(result.min_optimism_gap)) result.min_optimism_gap = 0.0;
    result.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<double>& epsilons,
                            const std::vector<std::uint64_t>& seeds, int jobs,
                            const std::function<void(const SweepRow&)>& on_row) {
    if (epsilons.empty()) throw std::invalid_argument("sweep: epsilon list must be non-empty");
    if (seeds.empty()) throw std::invalid_argument("sweep: seed list must be non-empty");
    if (jobs < 1) throw std::invalid_argument("sweep: jobs must be >= 1");

    struct Task {
        double epsilon;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    tasks.reserve(epsilons.size() * seeds.size());
    for (double e : epsilons) {
        for (std::uint64_t s : seeds) tasks.push_back({e, s});
    }

    std::vector<SweepRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex emit_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            RunConfig cfg = base;
            cfg.epsilon = tasks[i].epsilon;
            cfg.seed = tasks[i].seed;
            cfg.trace_path.clear();
            try {
                SweepRow row{tasks[i].epsilon, tasks[i].seed, run(cfg)};
                std::lock_guard<std::mutex> lock(emit_mutex);
                if (on_row) on_row(row);
                rows[i] = std::move(row);
            } catch (...) {
                std::lock_guard<std::mutex> lock(emit_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int n_threads = std::min<std::size_t>(jobs, tasks.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return rows;
}

double scaling_slope(const std::vector<SweepRow>& table) {
    std::vector<double> eps;
    std::vector<double> mean;
    for (const auto& row : table) {
        std::size_t i = 0;
        for (; i < eps.size(); ++i) {
            if (eps[i] == row.epsilon) break;
        }
        if (i == eps.size()) {
            eps.push_back(row.epsilon);
            mean.push_back(0.0);
        }
    }
    std::vector<std::int64_t> counts(eps.size(), 0);
    for (const auto& row : table) {
        for (std::size_t i = 0; i < eps.size(); ++i) {
            if (eps[i] == row.epsilon) {
                mean[i] += static_cast<double>(row.result.sample_complexity);
                ++counts[i];
                break;
            }
        }
    }
    if (eps.size() < 3) {
        throw std::runtime_error("scaling_slope: diagnostic unavailable, need >= 3 distinct epsilons");
    }
    for (std::size_t i = 0; i < eps.size(); ++i) {
        mean[i] /= static_cast<double>(counts[i]);
        if (mean[i] <= 0.0) {
            throw std::runtime_error("scaling_slope: diagnostic unavailable, zero mean count");
        }
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        double x = std::log(1.0 / eps[i]);
        double y = std::log(mean[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace paclab
