// paclab: run / sweep / schedule / oracle / plot-data front end.
// Exit codes: 0 success, 1 runtime error, 2 usage or config error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "paclab/harness.hpp"
#include "paclab/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunFlags {
    std::string config_path;
    std::string env;
    std::string agent = "multistage";
    double gamma = 0.0;
    double epsilon = 0.0;
    double p = 0.0;
    std::int64_t steps = -1;
    std::int64_t seed = -1;
    double bonus_scale = -1.0;
    double c1 = -1.0;
    double c10 = -1.0;
    std::int64_t cap_n0 = std::numeric_limits<std::int64_t>::min();
    std::int64_t cap_n1 = std::numeric_limits<std::int64_t>::min();
    double schedule_epsilon = 0.0;
    double oracle_tol = 0.0;
    std::int64_t window = 0;
    double optimism = -1.0;
    double last_coeff = 0.0;
    bool validate = false;
    bool no_diagnostics = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config_path, "flat JSON config file; flags override its values");
    cmd->add_option("--env", f.env, "environment spec, e.g. riverswim:n=6");
    cmd->add_option("--agent", f.agent, "multistage | advantage | modelbased | vanillaq");
    cmd->add_option("--gamma", f.gamma, "discount factor");
    cmd->add_option("--epsilon", f.epsilon, "suboptimality threshold");
    cmd->add_option("--p", f.p, "failure probability");
    cmd->add_option("--steps", f.steps, "step budget");
    cmd->add_option("--seed", f.seed, "run seed (PACLAB_SEED is the fallback)");
    cmd->add_option("--bonus-scale", f.bonus_scale, "multiplier on the exploration bonuses");
    cmd->add_option("--c1", f.c1, "N0 constant");
    cmd->add_option("--c10", f.c10, "N1 constant");
    cmd->add_option("--cap-n0", f.cap_n0, "cap on N0 (<= 0 disables the cap)");
    cmd->add_option("--cap-n1", f.cap_n1, "cap on N1 (<= 0 disables the cap)");
    cmd->add_option("--schedule-epsilon", f.schedule_epsilon,
                    "build schedule constants from this epsilon instead of --epsilon");
    cmd->add_option("--oracle-tol", f.oracle_tol, "oracle solver tolerance (default 1e-10)");
    cmd->add_option("--window", f.window, "suboptimality window size (default 10000)");
    cmd->add_option("--optimism", f.optimism, "model-based optimism constant");
    cmd->add_option("--last-coeff", f.last_coeff, "advantage bonus tail coefficient (4 or 5)");
    cmd->add_flag("--validate", f.validate, "run agent invariant checks every update");
    cmd->add_flag("--no-diagnostics", f.no_diagnostics, "skip diagnostic accumulation");
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PACLAB_SEED")) {
        return std::stoull(env);
    }
    return 0;
}

paclab::RunConfig build_config(const CLI::App* cmd, const RunFlags& f) {
    paclab::RunConfig cfg;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw std::invalid_argument("cannot open config file " + f.config_path);
        json j = json::parse(in);
        cfg = paclab::run_config_from_json(j);
    }
    if (cmd->count("--env")) cfg.env = f.env;
    if (cmd->count("--agent")) cfg.agent.kind = paclab::agent_kind_from_string(f.agent);
    if (cmd->count("--gamma")) cfg.gamma = f.gamma;
    if (cmd->count("--epsilon")) cfg.epsilon = f.epsilon;
    if (cmd->count("--p")) cfg.p = f.p;
    if (cmd->count("--steps")) cfg.step_budget = f.steps;
    if (cmd->count("--seed")) {
        cfg.seed = static_cast<std::uint64_t>(f.seed);
    } else if (f.config_path.empty()) {
        cfg.seed = default_seed();
    }
    if (cmd->count("--bonus-scale")) cfg.agent.bonus_scale = f.bonus_scale;
    if (cmd->count("--c1")) cfg.agent.c1 = f.c1;
    if (cmd->count("--c10")) cfg.agent.c10 = f.c10;
    if (cmd->count("--cap-n0")) {
        cfg.agent.cap_n0 = f.cap_n0 <= 0 ? std::nullopt : std::optional<std::int64_t>(f.cap_n0);
    }
    if (cmd->count("--cap-n1")) {
        cfg.agent.cap_n1 = f.cap_n1 <= 0 ? std::nullopt : std::optional<std::int64_t>(f.cap_n1);
    }
    if (cmd->count("--schedule-epsilon")) cfg.agent.schedule_epsilon = f.schedule_epsilon;
    if (cmd->count("--oracle-tol")) cfg.oracle_tol = f.oracle_tol;
    if (cmd->count("--window")) cfg.window = f.window;
    if (cmd->count("--optimism")) cfg.agent.optimism = f.optimism;
    if (cmd->count("--last-coeff")) cfg.agent.last_coeff = f.last_coeff;
    if (f.validate) cfg.validate = true;
    if (f.no_diagnostics) cfg.diagnostics = false;
    if (cfg.env.empty()) throw std::invalid_argument("an environment spec is required (--env)");
    if (cfg.step_budget < 0) throw std::invalid_argument("a step budget is required (--steps)");
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << text << '\n';
}

json run_summary(const paclab::RunConfig& cfg, const paclab::RunResult& result) {
    json j;
    j["schema"] = "v1";
    j["config"] = paclab::run_config_to_json(cfg);
    j["result"] = paclab::run_result_to_json(result);
    return j;
}

std::string format_eps(double eps) {
    std::ostringstream os;
    os << eps;
    std::string s = os.str();
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

int cmd_run(const CLI::App* cmd, const RunFlags& f, const std::string& out_path,
            const std::string& csv_path, bool per_step) {
    paclab::RunConfig cfg = build_config(cmd, f);
    cfg.trace_path = csv_path;
    cfg.trace_per_step = per_step;
    paclab::RunResult result = paclab::run(cfg);
    write_text(out_path, paclab::json_to_string(run_summary(cfg, result)));
    return 0;
}

int cmd_sweep(const CLI::App* cmd, const RunFlags& f, const std::vector<double>& epsilons,
              std::vector<std::uint64_t> seeds, std::int64_t num_seeds, int jobs,
              const std::string& out_dir) {
    paclab::RunConfig base = build_config(cmd, f);
    if (epsilons.empty()) throw std::invalid_argument("sweep requires --epsilons");
    if (seeds.empty()) {
        if (num_seeds < 1) throw std::invalid_argument("sweep requires --seeds or --num-seeds");
        for (std::int64_t i = 0; i < num_seeds; ++i) seeds.push_back(base.seed + i);
    }
    if (out_dir.empty()) throw std::invalid_argument("sweep requires --out-dir");
    fs::create_directories(out_dir);

    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    if (!summary) throw std::runtime_error("cannot open sweep summary file");
    summary << "epsilon,seed,sample_complexity\n";
    summary.precision(17);
    auto on_row = [&](const paclab::SweepRow& row) {
        summary << row.epsilon << ',' << row.seed << ',' << row.result.sample_complexity << '\n';
        summary.flush();
        paclab::RunConfig cfg = base;
        cfg.epsilon = row.epsilon;
        cfg.seed = row.seed;
        std::string name = "run_eps" + format_eps(row.epsilon) + "_seed" + std::to_string(row.seed) + ".json";
        std::ofstream out(fs::path(out_dir) / name);
        out << paclab::json_to_string(run_summary(cfg, row.result)) << '\n';
    };
    auto rows = paclab::sweep(base, epsilons, seeds, jobs, on_row);
    try {
        double slope = paclab::scaling_slope(rows);
        std::cout << "scaling slope: " << slope << '\n';
    } catch (const std::runtime_error&) {
        // fewer than 3 epsilons; slope not reported
    }
    return 0;
}

int cmd_schedule(double gamma, double epsilon, double p, int S, int A, const std::string& variant,
                 double c1, double c10, std::int64_t cap_n0, std::int64_t cap_n1, bool has_cap_n0,
                 bool has_cap_n1, const std::string& out_path) {
    paclab::ScheduleParams params;
    params.discount = gamma;
    params.epsilon = epsilon;
    params.failure_prob = p;
    params.num_states = S;
    params.num_actions = A;
    if (variant == "multistage") {
        params.variant = paclab::Variant::MultiStage;
    } else if (variant == "advantage") {
        params.variant = paclab::Variant::MultiStageAdvantage;
    } else {
        throw std::invalid_argument("unknown variant '" + variant + "'");
    }
    params.c1 = c1;
    params.c10 = c10;
    if (has_cap_n0) params.cap_n0 = cap_n0 <= 0 ? std::nullopt : std::optional<std::int64_t>(cap_n0);
    if (has_cap_n1) params.cap_n1 = cap_n1 <= 0 ? std::nullopt : std::optional<std::int64_t>(cap_n1);
    auto schedule = paclab::StageSchedule::build(params);
    write_text(out_path, paclab::json_to_string(paclab::schedule_dump(schedule)));
    return 0;
}

int cmd_oracle(const std::string& env, const std::string& mdp_path, double gamma, double tol,
               const std::string& out_path) {
    std::optional<paclab::TabularMdp> mdp;
    if (!mdp_path.empty()) {
        std::ifstream in(mdp_path);
        if (!in) throw std::invalid_argument("cannot open MDP file " + mdp_path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw std::invalid_argument(std::string("malformed MDP JSON: ") + e.what());
        }
        try {
            mdp = paclab::mdp_from_json(j);
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("malformed MDP JSON: ") + e.what());
        }
    } else if (!env.empty()) {
        mdp = paclab::EnvSpec::parse(env).build(gamma);
    } else {
        throw std::invalid_argument("oracle requires --env or --mdp");
    }
    auto solution = paclab::optimal_values(*mdp, tol);
    json j;
    j["values"] = solution.values;
    json q = json::array();
    for (int s = 0; s < mdp->num_states(); ++s) {
        auto row = solution.q.row(s);
        q.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["q"] = std::move(q);
    j["policy"] = paclab::greedy_policy(solution.q);
    write_text(out_path, paclab::json_to_string(j));
    return 0;
}

int cmd_plot_data(const std::string& in_dir, const std::string& out_path) {
    if (!fs::is_directory(in_dir)) throw std::invalid_argument("not a directory: " + in_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::invalid_argument("no run summaries found in " + in_dir);

    std::vector<paclab::SweepRow> rows;
    for (const auto& file : files) {
        std::ifstream in(file);
        json j = json::parse(in);
        paclab::SweepRow row;
        row.epsilon = j.at("config").at("epsilon").get<double>();
        row.seed = j.at("config").at("seed").get<std::uint64_t>();
        row.result.sample_complexity = j.at("result").at("sample_complexity").get<std::int64_t>();
        rows.push_back(std::move(row));
    }

    std::ostringstream csv;
    csv.precision(17);
    csv << "epsilon,seed,sample_complexity\n";
    for (const auto& row : rows) {
        csv << row.epsilon << ',' << row.seed << ',' << row.result.sample_complexity << '\n';
    }
    try {
        double slope = paclab::scaling_slope(rows);
        csv << "slope,," << slope << '\n';
    } catch (const std::runtime_error&) {
        // slope row omitted when the diagnostic is unavailable
    }
    std::string text = csv.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    write_text(out_path, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PAC reinforcement-learning lab for discounted tabular MDPs"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "execute one agent-environment run");
    RunFlags run_flags;
    add_run_flags(run_cmd, run_flags);
    std::string run_out, run_csv;
    bool run_per_step = false;
    run_cmd->add_option("--out", run_out, "summary JSON path (stdout when omitted)");
    run_cmd->add_option("--csv", run_csv, "per-run CSV record path");
    run_cmd->add_flag("--trace", run_per_step, "CSV rows per step instead of per window");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "epsilon x seed grid of runs");
    RunFlags sweep_flags;
    add_run_flags(sweep_cmd, sweep_flags);
    std::vector<double> sweep_eps;
    std::vector<std::uint64_t> sweep_seeds;
    std::int64_t sweep_num_seeds = 0;
    int sweep_jobs = 1;
    std::string sweep_dir;
    sweep_cmd->add_option("--epsilons", sweep_eps, "epsilon values")->delimiter(',');
    sweep_cmd->add_option("--seeds", sweep_seeds, "explicit seed list")->delimiter(',');
    sweep_cmd->add_option("--num-seeds", sweep_num_seeds, "number of seeds starting at --seed");
    sweep_cmd->add_option("--jobs", sweep_jobs, "parallel runs");
    sweep_cmd->add_option("--out-dir", sweep_dir, "output directory");

    // schedule
    auto* sched_cmd = app.add_subcommand("schedule", "dump the stage schedule constants");
    double s_gamma = 0.9, s_eps = 0.1, s_p = 0.05, s_c1 = 1.0, s_c10 = 1.0;
    int s_S = 1, s_A = 1;
    std::int64_t s_cap_n0 = 0, s_cap_n1 = 0;
    std::string s_variant = "multistage", s_out;
    sched_cmd->add_option("--gamma", s_gamma)->required();
    sched_cmd->add_option("--epsilon", s_eps)->required();
    sched_cmd->add_option("--p", s_p)->required();
    sched_cmd->add_option("--S", s_S)->required();
    sched_cmd->add_option("--A", s_A)->required();
    sched_cmd->add_option("--variant", s_variant, "multistage | advantage");
    sched_cmd->add_option("--c1", s_c1);
    sched_cmd->add_option("--c10", s_c10);
    sched_cmd->add_option("--cap-n0", s_cap_n0, "cap on N0 (<= 0 disables)");
    sched_cmd->add_option("--cap-n1", s_cap_n1, "cap on N1 (<= 0 disables)");
    sched_cmd->add_option("--out", s_out, "output path (stdout when omitted)");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "exact V*, Q*, and optimal policy");
    std::string o_env, o_mdp, o_out;
    double o_gamma = 0.9, o_tol = 1e-10;
    oracle_cmd->add_option("--env", o_env, "environment spec");
    oracle_cmd->add_option("--mdp", o_mdp, "MDP JSON file");
    oracle_cmd->add_option("--gamma", o_gamma, "discount (with --env)");
    oracle_cmd->add_option("--tol", o_tol, "solver tolerance");
    oracle_cmd->add_option("--out", o_out, "output path (stdout when omitted)");

    // plot-data
    auto* plot_cmd = app.add_subcommand("plot-data", "aggregate run summaries into tidy CSV");
    std::string p_in, p_out;
    plot_cmd->add_option("--in-dir", p_in)->required();
    plot_cmd->add_option("--out", p_out, "output path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_cmd, run_flags, run_out, run_csv, run_per_step);
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sweep_cmd, sweep_flags, sweep_eps, sweep_seeds, sweep_num_seeds,
                             sweep_jobs, sweep_dir);
        }
        if (sched_cmd->parsed()) {
            return cmd_schedule(s_gamma, s_eps, s_p, s_S, s_A, s_variant, s_c1, s_c10, s_cap_n0,
                                s_cap_n1, sched_cmd->count("--cap-n0") > 0,
                                sched_cmd->count("--cap-n1") > 0, s_out);
        }
        if (oracle_cmd->parsed()) return cmd_oracle(o_env, o_mdp, o_gamma, o_tol, o_out);
        if (plot_cmd->parsed()) return cmd_plot_data(p_in, p_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
