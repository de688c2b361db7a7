#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "paclab/mdp.hpp"
#include "paclab/schedule.hpp"

#include "json.hpp"

namespace paclab {

enum class UpdateKind { None, TypeOne, TypeTwo, Both, ReferenceSet };

const char* to_string(UpdateKind kind);

/// Diagnostic record of one observe() call.
struct UpdateEvent {
    UpdateKind kind = UpdateKind::None;
    int state = -1;
    int action = -1;
    double new_q = 0.0;
    double bonus_used = 0.0;
    bool reference_set = false;
    /// True when some Q entry actually changed value this step. This is what
    /// the harness keys its policy-evaluation cache on; `kind` stays the
    /// staged-update diagnostic.
    bool q_changed = false;
};

/// min{ scale * 2 sqrt(H^2 iota / n_stage), vmax }; n_stage = 0 falls back to
/// vmax (the before-first-stage convention).
double hoeffding_bonus(std::int64_t n_stage, int H, double iota, double scale, double vmax);

/// Bernstein-style bonus from the advantage-stage and lifetime-reference
/// accumulators. Empirical variances are floored at 0 before the square
/// roots; `scale` multiplies the whole pre-cap expression. `last_coeff` is
/// the coefficient on the (H iota / n + H iota / n_check) tail term; the
/// algorithm listing uses 4 while its appendix restatement uses 5, so it is
/// configurable with default 4.
double bernstein_bonus(double mu_check, double sigma_check, std::int64_t n_check, double mu_ref,
                       double sigma_ref, std::int64_t n_total, int H, double iota, double scale,
                       double vmax, double last_coeff = 4.0);

/// Uniform learner interface driven by the harness: act is a pure read,
/// observe feeds one transition. One logical thread per instance.
class Agent {
public:
    virtual ~Agent() = default;
    virtual int act(int state) const = 0;
    virtual UpdateEvent observe(int state, int action, double reward, int next_state) = 0;
    virtual const QTable& q_table() const = 0;
    virtual const ValueFunction& v_table() const = 0;
    virtual std::string name() const = 0;
    /// Number of stored scalars, for memory-shape audits.
    virtual std::size_t state_scalar_count() const = 0;
    virtual nlohmann::json snapshot() const = 0;
    virtual void restore(const nlohmann::json& snap) = 0;

    // Invariant checking (monotone Q, bounds, V consistency, N0 freeze).
    void set_validation(bool on) { validate_ = on; }
    std::int64_t invariant_violations() const { return violations_; }

protected:
    bool validate_ = false;
    std::int64_t violations_ = 0;
};

struct StagedAgentConfig {
    StageSchedule schedule{1, 1.0, 0, 0, 1.0};
    double discount = 0.9;
    double bonus_scale = 1.0;
    double last_coeff = 4.0;  // advantage bonus tail coefficient (4 or 5)
};

/// Shared state of the two staged learners: optimistic Q/V, per-pair visit
/// counters, per-stage accumulators and stage cursors, learned deterministic
/// rewards. All tables are O(SA).
class StagedAgentBase : public Agent {
public:
    StagedAgentBase(int num_states, int num_actions, StagedAgentConfig config);

    int act(int state) const override;
    const QTable& q_table() const override { return q_; }
    const ValueFunction& v_table() const override { return v_; }
    std::size_t state_scalar_count() const override;

    const StageSchedule& schedule() const { return config_.schedule; }
    double vmax() const { return 1.0 / (1.0 - config_.discount); }
    std::int64_t visit_count(int s, int a) const { return n_(s, a); }
    std::int64_t step_count() const { return steps_; }

protected:
    template <typename T>
    class Table {
    public:
        Table() = default;
        Table(int s, int a, T fill) : a_(a), v_(static_cast<std::size_t>(s) * a, fill) {}
        T operator()(int s, int a) const { return v_[static_cast<std::size_t>(s) * a_ + a]; }
        T& operator()(int s, int a) { return v_[static_cast<std::size_t>(s) * a_ + a]; }
        const std::vector<T>& data() const { return v_; }
        std::vector<T>& data() { return v_; }

    private:
        int a_ = 0;
        std::vector<T> v_;
    };

    void check_indices(int s, int a, int s_next) const;
    /// min-update of Q(s,a) with `candidate`; refreshes V(s); runs invariant
    /// checks when validation is on. Returns the new Q value.
    double apply_min_update(int s, int a, double candidate);
    void note_freeze(int s, int a);

    int states_ = 0;
    int actions_ = 0;
    StagedAgentConfig config_;
    QTable q_;
    ValueFunction v_;
    Table<std::int64_t> n_, n_check_, n_bar_;
    Table<double> mu_check_, mu_bar_;
    Table<double> reward_;  // deterministic rewards, learned on first visit
    std::vector<StageCursor> cursors_;
    std::int64_t steps_ = 0;
    Table<double> frozen_q_;  // validation only: Q at freeze time

    StageCursor& cursor(int s, int a) { return cursors_[static_cast<std::size_t>(s) * actions_ + a]; }

    nlohmann::json base_snapshot() const;
    void base_restore(const nlohmann::json& snap);
};

/// Hoeffding-bonus staged Q-learning: type-I and type-II stage boundaries
/// both trigger min-updates of Q from the stage accumulators.
class MultiStageAgent : public StagedAgentBase {
public:
    MultiStageAgent(int num_states, int num_actions, StagedAgentConfig config);
    UpdateEvent observe(int state, int action, double reward, int next_state) override;
    std::string name() const override { return "multistage"; }
    nlohmann::json snapshot() const override;
    void restore(const nlohmann::json& snap) override;
};

/// Reference-advantage variant: type-I stages accumulate advantages against a
/// per-state reference value function (learned once, when the state's total
/// visit count first reaches N1) and use the Bernstein-style bonus.
class MultiStageAdvantageAgent : public StagedAgentBase {
public:
    MultiStageAdvantageAgent(int num_states, int num_actions, StagedAgentConfig config);
    UpdateEvent observe(int state, int action, double reward, int next_state) override;
    std::string name() const override { return "advantage"; }
    std::size_t state_scalar_count() const override;
    nlohmann::json snapshot() const override;
    void restore(const nlohmann::json& snap) override;

    const ValueFunction& reference_values() const { return v_ref_; }
    bool reference_set(int s) const { return ref_set_[s] != 0; }

private:
    ValueFunction v_ref_;
    Table<double> mu_ref_, sigma_ref_, sigma_check_;
    std::vector<std::int64_t> state_visits_;
    std::vector<std::uint8_t> ref_set_;
};

/// Model-based contrast: empirical transition counts (O(S^2 A) memory),
/// optimistic rewards, value-iteration replans on a stage cadence.
class ModelBasedAgent : public Agent {
public:
    ModelBasedAgent(int num_states, int num_actions, double discount, double optimism);
    int act(int state) const override;
    UpdateEvent observe(int state, int action, double reward, int next_state) override;
    const QTable& q_table() const override { return q_; }
    const ValueFunction& v_table() const override { return v_; }
    std::string name() const override { return "modelbased"; }
    std::size_t state_scalar_count() const override;
    nlohmann::json snapshot() const override;
    void restore(const nlohmann::json& snap) override;

private:
    void replan();

    int states_, actions_;
    double discount_, optimism_;
    QTable q_;
    ValueFunction v_;
    std::vector<std::int64_t> counts_;       // S*A*S'
    std::vector<std::int64_t> visit_counts_; // S*A
    std::vector<double> reward_sum_;         // S*A
    std::vector<std::int64_t> replan_at_;    // S*A next visit count that triggers a replan
    std::vector<std::int64_t> replan_d_;     // S*A current replan-stage length
    int replan_h_;
};

/// Plain optimistic Q-learning with 1/count step sizes.
class VanillaQAgent : public Agent {
public:
    VanillaQAgent(int num_states, int num_actions, double discount);
    int act(int state) const override;
    UpdateEvent observe(int state, int action, double reward, int next_state) override;
    const QTable& q_table() const override { return q_; }
    const ValueFunction& v_table() const override { return v_; }
    std::string name() const override { return "vanillaq"; }
    std::size_t state_scalar_count() const override;
    nlohmann::json snapshot() const override;
    void restore(const nlohmann::json& snap) override;

private:
    int states_, actions_;
    double discount_;
    QTable q_;
    ValueFunction v_;
    std::vector<std::int64_t> counts_;
};

}  // namespace paclab
