#include "paclab/agents.hpp"

#include <cmath>
#include <stdexcept>

namespace paclab {

const char* to_string(UpdateKind kind) {
    switch (kind) {
        case UpdateKind::None: return "none";
        case UpdateKind::TypeOne: return "type1";
        case UpdateKind::TypeTwo: return "type2";
        case UpdateKind::Both: return "both";
        case UpdateKind::ReferenceSet: return "reference";
    }
    return "none";
}

double hoeffding_bonus(std::int64_t n_stage, int H, double iota, double scale, double vmax) {
    if (n_stage < 0) throw std::invalid_argument("hoeffding_bonus: negative stage count");
    if (n_stage == 0) return vmax;
    double hd = static_cast<double>(H);
    double pre = 2.0 * std::sqrt(hd * hd * iota / static_cast<double>(n_stage));
    return std::min(scale * pre, vmax);
}

double bernstein_bonus(double mu_check, double sigma_check, std::int64_t n_check, double mu_ref,
                       double sigma_ref, std::int64_t n_total, int H, double iota, double scale,
                       double vmax, double last_coeff) {
    if (n_check < 0 || n_total < 0) throw std::invalid_argument("bernstein_bonus: negative count");
    if (n_check == 0) return vmax;
    if (n_total < n_check) throw std::invalid_argument("bernstein_bonus: n_total < n_check");
    double nc = static_cast<double>(n_check);
    double nt = static_cast<double>(n_total);
    double hd = static_cast<double>(H);
    // Floating-point cancellation can push the empirical variances a hair
    // below zero; floor before the square roots.
    double var_check = std::max(sigma_check / nc - (mu_check / nc) * (mu_check / nc), 0.0);
    double var_ref = std::max(sigma_ref / nt - (mu_ref / nt) * (mu_ref / nt), 0.0);
    double pre = 2.0 * std::sqrt(2.0) * (std::sqrt(var_check / nc * iota) + std::sqrt(var_ref / nt * iota)) +
                 7.0 * (hd * std::pow(iota, 0.75) / std::pow(nt, 0.75) +
                        hd * std::pow(iota, 0.75) / std::pow(nc, 0.75)) +
                 last_coeff * (hd * iota / nt + hd * iota / nc);
    return std::min(scale * pre, vmax);
}

StagedAgentBase::StagedAgentBase(int num_states, int num_actions, StagedAgentConfig config)
    : states_(num_states), actions_(num_actions), config_(std::move(config)) {
    if (num_states <= 0 || num_actions <= 0) {
        throw std::invalid_argument("agent: dimensions must be positive");
    }
    if (!(config_.discount > 0.0) || !(config_.discount < 1.0)) {
        throw std::invalid_argument("agent: discount must lie in (0,1)");
    }
    if (config_.bonus_scale < 0.0) throw std::invalid_argument("agent: bonus_scale must be >= 0");
    const double opt = vmax();
    q_ = QTable(states_, actions_, opt);
    v_.assign(states_, opt);
    n_ = Table<std::int64_t>(states_, actions_, 0);
    n_check_ = Table<std::int64_t>(states_, actions_, 0);
    n_bar_ = Table<std::int64_t>(states_, actions_, 0);
    mu_check_ = Table<double>(states_, actions_, 0.0);
    mu_bar_ = Table<double>(states_, actions_, 0.0);
    reward_ = Table<double>(states_, actions_, 0.0);
    frozen_q_ = Table<double>(states_, actions_, 0.0);
    cursors_.assign(static_cast<std::size_t>(states_) * actions_, StageCursor(config_.schedule));
}

int StagedAgentBase::act(int state) const {
    if (state < 0 || state >= states_) throw std::invalid_argument("act: invalid state");
    return q_.row_argmax(state);
}

void StagedAgentBase::check_indices(int s, int a, int s_next) const {
    if (s < 0 || s >= states_ || a < 0 || a >= actions_ || s_next < 0 || s_next >= states_) {
        throw std::invalid_argument("observe: invalid state or action index");
    }
}

double StagedAgentBase::apply_min_update(int s, int a, double candidate) {
    double old_q = q_(s, a);
    double new_q = std::min(candidate, old_q);
    q_(s, a) = new_q;
    v_[s] = q_.row_max(s);
    if (validate_) {
        if (new_q > old_q) ++violations_;
        if (new_q < 0.0 || new_q > vmax()) ++violations_;
        if (v_[s] != q_.row_max(s)) ++violations_;
        if (n_(s, a) > config_.schedule.N0()) ++violations_;  // update past the freeze point
    }
    return new_q;
}

void StagedAgentBase::note_freeze(int s, int a) {
    if (validate_ && n_(s, a) == config_.schedule.N0()) frozen_q_(s, a) = q_(s, a);
}

std::size_t StagedAgentBase::state_scalar_count() const {
    std::size_t sa = static_cast<std::size_t>(states_) * actions_;
    // Q + 5 SA tables + learned rewards + cursors (8 ints each) + V.
    return sa * 7 + cursors_.size() * 8 + v_.size();
}

nlohmann::json StagedAgentBase::base_snapshot() const {
    nlohmann::json j;
    j["steps"] = steps_;
    j["q"] = q_.data();
    j["v"] = v_;
    j["n"] = n_.data();
    j["n_check"] = n_check_.data();
    j["n_bar"] = n_bar_.data();
    j["mu_check"] = mu_check_.data();
    j["mu_bar"] = mu_bar_.data();
    j["reward"] = reward_.data();
    nlohmann::json cur = nlohmann::json::array();
    for (const auto& c : cursors_) {
        auto st = c.state();
        cur.push_back({st.n, st.j1, st.k1, st.d1, st.end1, st.j2, st.d2, st.end2});
    }
    j["cursors"] = std::move(cur);
    return j;
}

void StagedAgentBase::base_restore(const nlohmann::json& j) {
    steps_ = j.at("steps").get<std::int64_t>();
    q_.data() = j.at("q").get<std::vector<double>>();
    v_ = j.at("v").get<ValueFunction>();
    n_.data() = j.at("n").get<std::vector<std::int64_t>>();
    n_check_.data() = j.at("n_check").get<std::vector<std::int64_t>>();
    n_bar_.data() = j.at("n_bar").get<std::vector<std::int64_t>>();
    mu_check_.data() = j.at("mu_check").get<std::vector<double>>();
    mu_bar_.data() = j.at("mu_bar").get<std::vector<double>>();
    reward_.data() = j.at("reward").get<std::vector<double>>();
    const auto& cur = j.at("cursors");
    for (std::size_t i = 0; i < cursors_.size(); ++i) {
        const auto& c = cur.at(i);
        StageCursor::State st{c.at(0).get<std::int64_t>(), c.at(1).get<std::int64_t>(),
                              c.at(2).get<std::int64_t>(), c.at(3).get<std::int64_t>(),
                              c.at(4).get<std::int64_t>(), c.at(5).get<std::int64_t>(),
                              c.at(6).get<std::int64_t>(), c.at(7).get<std::int64_t>()};
        cursors_[i].restore(config_.schedule, st);
    }
}

MultiStageAgent::MultiStageAgent(int num_states, int num_actions, StagedAgentConfig config)
    : StagedAgentBase(num_states, num_actions, std::move(config)) {}

UpdateEvent MultiStageAgent::observe(int s, int a, double reward, int s_next) {
    check_indices(s, a, s_next);
    ++steps_;
    const auto& sched = config_.schedule;

    auto bounds = cursor(s, a).advance();
    const std::int64_t n = ++n_(s, a);
    ++n_check_(s, a);
    ++n_bar_(s, a);
    mu_check_(s, a) += v_[s_next];
    mu_bar_(s, a) += v_[s_next];
    reward_(s, a) = reward;

    if (validate_ && n > sched.N0() && q_(s, a) != frozen_q_(s, a)) ++violations_;

    UpdateEvent ev;
    ev.state = s;
    ev.action = a;
    const bool type2 = bounds.type2 && n <= sched.N0();
    if (bounds.type1) {
        double b = hoeffding_bonus(n_check_(s, a), sched.H(), sched.iota(), config_.bonus_scale, vmax());
        double candidate = reward_(s, a) + config_.discount * (mu_check_(s, a) / n_check_(s, a)) + b;
        double before = q_(s, a);
        double nq = apply_min_update(s, a, candidate);
        ev.q_changed |= nq != before;
        n_check_(s, a) = 0;
        mu_check_(s, a) = 0.0;
        ev.kind = UpdateKind::TypeOne;
        ev.new_q = nq;
        ev.bonus_used = b;
    }
    if (type2) {
        double b = hoeffding_bonus(n_bar_(s, a), sched.H(), sched.iota(), config_.bonus_scale, vmax());
        double candidate = reward_(s, a) + config_.discount * (mu_bar_(s, a) / n_bar_(s, a)) + b;
        double before = q_(s, a);
        double nq = apply_min_update(s, a, candidate);
        ev.q_changed |= nq != before;
        n_bar_(s, a) = 0;
        mu_bar_(s, a) = 0.0;
        ev.kind = bounds.type1 ? UpdateKind::Both : UpdateKind::TypeTwo;
        ev.new_q = nq;
        ev.bonus_used = b;
    }
    note_freeze(s, a);
    return ev;
}

nlohmann::json MultiStageAgent::snapshot() const {
    nlohmann::json j = base_snapshot();
    j["agent"] = name();
    return j;
}

void MultiStageAgent::restore(const nlohmann::json& snap) {
    if (snap.at("agent").get<std::string>() != name()) {
        throw std::invalid_argument("restore: snapshot is for a different agent kind");
    }
    base_restore(snap);
}

MultiStageAdvantageAgent::MultiStageAdvantageAgent(int num_states, int num_actions,
                                                   StagedAgentConfig config)
    : StagedAgentBase(num_states, num_actions, std::move(config)) {
    v_ref_.assign(states_, vmax());
    mu_ref_ = Table<double>(states_, actions_, 0.0);
    sigma_ref_ = Table<double>(states_, actions_, 0.0);
    sigma_check_ = Table<double>(states_, actions_, 0.0);
    state_visits_.assign(states_, 0);
    ref_set_.assign(states_, 0);
}

UpdateEvent MultiStageAdvantageAgent::observe(int s, int a, double reward, int s_next) {
    check_indices(s, a, s_next);
    ++steps_;
    const auto& sched = config_.schedule;

    auto bounds = cursor(s, a).advance();
    const std::int64_t n = ++n_(s, a);
    ++n_check_(s, a);
    ++n_bar_(s, a);
    const double ref_next = v_ref_[s_next];
    const double advantage = v_[s_next] - ref_next;
    mu_check_(s, a) += advantage;
    sigma_check_(s, a) += advantage * advantage;
    mu_ref_(s, a) += ref_next;
    sigma_ref_(s, a) += ref_next * ref_next;
    mu_bar_(s, a) += v_[s_next];
    reward_(s, a) = reward;

    if (validate_ && n > sched.N0() && q_(s, a) != frozen_q_(s, a)) ++violations_;

    UpdateEvent ev;
    ev.state = s;
    ev.action = a;
    const bool type2 = bounds.type2 && n <= sched.N0();
    if (bounds.type1) {
        if (validate_) {
            double nc = static_cast<double>(n_check_(s, a));
            double nt = static_cast<double>(n);
            if (sigma_check_(s, a) / nc - std::pow(mu_check_(s, a) / nc, 2) < -1e-9) ++violations_;
            if (sigma_ref_(s, a) / nt - std::pow(mu_ref_(s, a) / nt, 2) < -1e-9) ++violations_;
        }
        double b = bernstein_bonus(mu_check_(s, a), sigma_check_(s, a), n_check_(s, a), mu_ref_(s, a),
                                   sigma_ref_(s, a), n, sched.H(), sched.iota(), config_.bonus_scale,
                                   vmax(), config_.last_coeff);
        double candidate =
            reward_(s, a) +
            config_.discount * (mu_check_(s, a) / n_check_(s, a) + mu_ref_(s, a) / n + b);
        double before = q_(s, a);
        double nq = apply_min_update(s, a, candidate);
        ev.q_changed |= nq != before;
        n_check_(s, a) = 0;
        mu_check_(s, a) = 0.0;
        sigma_check_(s, a) = 0.0;
        ev.kind = UpdateKind::TypeOne;
        ev.new_q = nq;
        ev.bonus_used = b;
    }
    if (type2) {
        double b = hoeffding_bonus(n_bar_(s, a), sched.H(), sched.iota(), config_.bonus_scale, vmax());
        double candidate = reward_(s, a) + config_.discount * (mu_bar_(s, a) / n_bar_(s, a) + b);
        double before = q_(s, a);
        double nq = apply_min_update(s, a, candidate);
        ev.q_changed |= nq != before;
        n_bar_(s, a) = 0;
        mu_bar_(s, a) = 0.0;
        ev.kind = bounds.type1 ? UpdateKind::Both : UpdateKind::TypeTwo;
        ev.new_q = nq;
        ev.bonus_used = b;
    }

    // Learn the reference value function: first time the state's total visit
    // count reaches N1, exactly once.
    ++state_visits_[s];
    if (!ref_set_[s] && state_visits_[s] >= sched.N1()) {
        v_ref_[s] = v_[s];
        ref_set_[s] = 1;
        ev.reference_set = true;
        if (ev.kind == UpdateKind::None) ev.kind = UpdateKind::ReferenceSet;
    }
    note_freeze(s, a);
    return ev;
}

std::size_t MultiStageAdvantageAgent::state_scalar_count() const {
    std::size_t sa = static_cast<std::size_t>(states_) * actions_;
    return StagedAgentBase::state_scalar_count() + sa * 3 + v_ref_.size() + state_visits_.size() +
           ref_set_.size();
}

nlohmann::json MultiStageAdvantageAgent::snapshot() const {
    nlohmann::json j = base_snapshot();
    j["agent"] = name();
    j["v_ref"] = v_ref_;
    j["mu_ref"] = mu_ref_.data();
    j["sigma_ref"] = sigma_ref_.data();
    j["sigma_check"] = sigma_check_.data();
    j["state_visits"] = state_visits_;
    j["ref_set"] = ref_set_;
    return j;
}

void MultiStageAdvantageAgent::restore(const nlohmann::json& snap) {
    if (snap.at("agent").get<std::string>() != name()) {
        throw std::invalid_argument("restore: snapshot is for a different agent kind");
    }
    base_restore(snap);
    v_ref_ = snap.at("v_ref").get<ValueFunction>();
    mu_ref_.data() = snap.at("mu_ref").get<std::vector<double>>();
    sigma_ref_.data() = snap.at("sigma_ref").get<std::vector<double>>();
    sigma_check_.data() = snap.at("sigma_check").get<std::vector<double>>();
    state_visits_ = snap.at("state_visits").get<std::vector<std::int64_t>>();
    ref_set_ = snap.at("ref_set").get<std::vector<std::uint8_t>>();
}

ModelBasedAgent::ModelBasedAgent(int num_states, int num_actions, double discount, double optimism)
    : states_(num_states),
      actions_(num_actions),
      discount_(discount),
      optimism_(optimism),
      q_(num_states, num_actions, 0.0),
      v_(num_states, 0.0),
      counts_(static_cast<std::size_t>(num_states) * num_actions * num_states, 0),
      visit_counts_(static_cast<std::size_t>(num_states) * num_actions, 0),
      reward_sum_(static_cast<std::size_t>(num_states) * num_actions, 0.0),
      replan_at_(static_cast<std::size_t>(num_states) * num_actions, 1) {
    if (!(discount > 0.0) || !(discount < 1.0)) {
        throw std::invalid_argument("agent: discount must lie in (0,1)");
    }
    replan_h_ = static_cast<int>(std::ceil(1.0 / (1.0 - discount)));
    replan_d_.assign(static_cast<std::size_t>(num_states) * num_actions, replan_h_);
    replan();
}

int ModelBasedAgent::act(int state) const {
    if (state < 0 || state >= states_) throw std::invalid_argument("act: invalid state");
    return q_.row_argmax(state);
}

UpdateEvent ModelBasedAgent::observe(int s, int a, double reward, int s_next) {
    if (s < 0 || s >= states_ || a < 0 || a >= actions_ || s_next < 0 || s_next >= states_) {
        throw std::invalid_argument("observe: invalid state or action index");
    }
    std::size_t sa = static_cast<std::size_t>(s) * actions_ + a;
    ++counts_[sa * states_ + s_next];
    std::int64_t n = ++visit_counts_[sa];
    reward_sum_[sa] += reward;

    UpdateEvent ev;
    ev.state = s;
    ev.action = a;
    if (n == replan_at_[sa]) {
        // Next replan once this pair accrues another stage, with stage
        // lengths growing like the d-sequence.
        replan_at_[sa] += replan_d_[sa];
        replan_d_[sa] += replan_d_[sa] / replan_h_;
        std::vector<double> before = q_.data();
        replan();
        ev.q_changed = q_.data() != before;
        ev.new_q = q_(s, a);
    }
    return ev;
}

void ModelBasedAgent::replan() {
    const double g = discount_;
    const double stop = 1e-8 * (1.0 - g) / (2.0 * g);
    std::vector<double> p_hat(static_cast<std::size_t>(states_) * actions_ * states_, 0.0);
    std::vector<double> r_hat(static_cast<std::size_t>(states_) * actions_, 0.0);
    for (int s = 0; s < states_; ++s) {
        for (int a = 0; a < actions_; ++a) {
            std::size_t sa = static_cast<std::size_t>(s) * actions_ + a;
            std::int64_t n = visit_counts_[sa];
            if (n == 0) {
                p_hat[sa * states_ + s] = 1.0;  // self-loop, optimistic reward
                r_hat[sa] = 1.0;
            } else {
                for (int j = 0; j < states_; ++j) {
                    p_hat[sa * states_ + j] =
                        static_cast<double>(counts_[sa * states_ + j]) / static_cast<double>(n);
                }
                r_hat[sa] = std::min(1.0, reward_sum_[sa] / static_cast<double>(n) +
                                              optimism_ / std::sqrt(static_cast<double>(n)));
            }
        }
    }
    ValueFunction v(states_, 0.0);
    ValueFunction next(states_);
    for (;;) {
        double diff = 0.0;
        for (int s = 0; s < states_; ++s) {
            double best = -1.0;
            for (int a = 0; a < actions_; ++a) {
                std::size_t sa = static_cast<std::size_t>(s) * actions_ + a;
                double acc = 0.0;
                for (int j = 0; j < states_; ++j) acc += p_hat[sa * states_ + j] * v[j];
                best = std::max(best, r_hat[sa] + g * acc);
            }
            next[s] = best;
            diff = std::max(diff, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        if (diff <= stop) break;
    }
    for (int s = 0; s < states_; ++s) {
        for (int a = 0; a < actions_; ++a) {
            std::size_t sa = static_cast<std::size_t>(s) * actions_ + a;
            double acc = 0.0;
            for (int j = 0; j < states_; ++j) acc += p_hat[sa * states_ + j] * v[j];
            q_(s, a) = r_hat[sa] + g * acc;
        }
    }
    v_ = std::move(v);
}

std::size_t ModelBasedAgent::state_scalar_count() const {
    return counts_.size() + visit_counts_.size() + reward_sum_.size() + replan_at_.size() +
           replan_d_.size() + q_.data().size() + v_.size();
}

nlohmann::json ModelBasedAgent::snapshot() const {
    nlohmann::json j;
    j["agent"] = name();
    j["counts"] = counts_;
    j["visit_counts"] = visit_counts_;
    j["reward_sum"] = reward_sum_;
    j["replan_at"] = replan_at_;
    j["replan_d"] = replan_d_;
    j["q"] = q_.data();
    j["v"] = v_;
    return j;
}

void ModelBasedAgent::restore(const nlohmann::json& snap) {
    if (snap.at("agent").get<std::string>() != name()) {
        throw std::invalid_argument("restore: snapshot is for a different agent kind");
    }
    counts_ = snap.at("counts").get<std::vector<std::int64_t>>();
    visit_counts_ = snap.at("visit_counts").get<std::vector<std::int64_t>>();
    reward_sum_ = snap.at("reward_sum").get<std::vector<double>>();
    replan_at_ = snap.at("replan_at").get<std::vector<std::int64_t>>();
    replan_d_ = snap.at("replan_d").get<std::vector<std::int64_t>>();
    q_.data() = snap.at("q").get<std::vector<double>>();
    v_ = snap.at("v").get<ValueFunction>();
}

VanillaQAgent::VanillaQAgent(int num_states, int num_actions, double discount)
    : states_(num_states),
      actions_(num_actions),
      discount_(discount),
      q_(num_states, num_actions, 1.0 / (1.0 - discount)),
      v_(num_states, 1.0 / (1.0 - discount)),
      counts_(static_cast<std::size_t>(num_states) * num_actions, 0) {
    if (!(discount > 0.0) || !(discount < 1.0)) {
        throw std::invalid_argument("agent: discount must lie in (0,1)");
    }
}

int VanillaQAgent::act(int state) const {
    if (state < 0 || state >= states_) throw std::invalid_argument("act: invalid state");
    return q_.row_argmax(state);
}

UpdateEvent VanillaQAgent::observe(int s, int a, double reward, int s_next) {
    if (s < 0 || s >= states_ || a < 0 || a >= actions_ || s_next < 0 || s_next >= states_) {
        throw std::invalid_argument("observe: invalid state or action index");
    }
    std::int64_t n = ++counts_[static_cast<std::size_t>(s) * actions_ + a];
    double alpha = 1.0 / static_cast<double>(n);
    double old_q = q_(s, a);
    double target = reward + discount_ * v_[s_next];
    q_(s, a) = old_q + alpha * (target - old_q);
    v_[s] = q_.row_max(s);
    UpdateEvent ev;
    ev.state = s;
    ev.action = a;
    ev.new_q = q_(s, a);
    ev.q_changed = q_(s, a) != old_q;
    return ev;
}

std::size_t VanillaQAgent::state_scalar_count() const {
    return q_.data().size() + v_.size() + counts_.size();
}

nlohmann::json VanillaQAgent::snapshot() const {
    nlohmann::json j;
    j["agent"] = name();
    j["q"] = q_.data();
    j["v"] = v_;
    j["counts"] = counts_;
    return j;
}

void VanillaQAgent::restore(const nlohmann::json& snap) {
    if (snap.at("agent").get<std::string>() != name()) {
        throw std::invalid_argument("restore: snapshot is for a different agent kind");
    }
    q_.data() = snap.at("q").get<std::vector<double>>();
    v_ = snap.at("v").get<ValueFunction>();
    counts_ = snap.at("counts").get<std::vector<std::int64_t>>();
}

}  // namespace paclab
