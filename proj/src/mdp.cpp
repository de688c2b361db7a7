#include "paclab/mdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace paclab {

double clip(double x, double threshold) {
    if (!std::isfinite(x) || !std::isfinite(threshold)) {
        throw std::invalid_argument("clip: arguments must be finite");
    }
    return x >= threshold ? x : 0.0;
}

QTable::QTable(int num_states, int num_actions, double fill)
    : states_(num_states),
      actions_(num_actions),
      values_(static_cast<std::size_t>(num_states) * num_actions, fill) {
    if (num_states <= 0 || num_actions <= 0) {
        throw std::invalid_argument("QTable: dimensions must be positive");
    }
}

int QTable::row_argmax(int s) const {
    auto r = row(s);
    int best = 0;
    for (int a = 1; a < actions_; ++a) {
        if (r[a] > r[best]) best = a;
    }
    return best;
}

double QTable::row_max(int s) const { return row(s)[row_argmax(s)]; }

TabularMdp::TabularMdp(int num_states, int num_actions, std::vector<double> transitions,
                       std::vector<double> rewards, double discount)
    : states_(num_states),
      actions_(num_actions),
      discount_(discount),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)) {
    if (states_ <= 0 || actions_ <= 0) {
        throw std::invalid_argument("TabularMdp: num_states and num_actions must be positive");
    }
    if (!(discount_ > 0.0) || !(discount_ < 1.0)) {
        throw std::invalid_argument("TabularMdp: discount must lie in (0,1)");
    }
    const std::size_t sa = static_cast<std::size_t>(states_) * actions_;
    if (rewards_.size() != sa) {
        throw std::invalid_argument("TabularMdp: rewards table must have S*A entries");
    }
    if (transitions_.size() != sa * states_) {
        throw std::invalid_argument("TabularMdp: transition table must have S*A*S entries");
    }
    for (double r : rewards_) {
        if (!std::isfinite(r) || r < 0.0 || r > 1.0) {
            throw std::invalid_argument("TabularMdp: rewards must lie in [0,1]");
        }
    }
    for (std::size_t row = 0; row < sa; ++row) {
        double* p = transitions_.data() + row * states_;
        double sum = 0.0;
        for (int j = 0; j < states_; ++j) {
            if (!std::isfinite(p[j]) || p[j] < 0.0) {
                throw std::invalid_argument("TabularMdp: transition probabilities must be non-negative");
            }
            sum += p[j];
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("TabularMdp: transition row sums to " + std::to_string(sum) +
                                        ", expected 1 within 1e-9");
        }
        for (int j = 0; j < states_; ++j) p[j] /= sum;
    }
}

double TabularMdp::expected_value(int s, int a, const ValueFunction& v) const {
    auto p = transition_row(s, a);
    double acc = 0.0;
    for (int j = 0; j < states_; ++j) acc += p[j] * v[j];
    return acc;
}

ValueFunction bellman_optimality_backup(const TabularMdp& mdp, const ValueFunction& v) {
    if (static_cast<int>(v.size()) != mdp.num_states()) {
        throw std::invalid_argument("bellman_optimality_backup: value function has wrong length");
    }
    ValueFunction out(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < mdp.num_actions(); ++a) {
            double q = mdp.reward(s, a) + mdp.discount() * mdp.expected_value(s, a, v);
            if (q > best) best = q;
        }
        out[s] = best;
    }
    return out;
}

namespace {

double sup_diff(const ValueFunction& a, const ValueFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

OptimalSolution optimal_values(const TabularMdp& mdp, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("optimal_values: tol must be positive");
    const double g = mdp.discount();
    const double stop = tol * (1.0 - g) / (2.0 * g);
    ValueFunction v(mdp.num_states(), 0.0);
    for (;;) {
        ValueFunction next = bellman_optimality_backup(mdp, v);
        double d = sup_diff(next, v);
        v = std::move(next);
        if (d <= stop) break;
    }
    QTable q(mdp.num_states(), mdp.num_actions());
    for (int s = 0; s < mdp.num_states(); ++s) {
        for (int a = 0; a < mdp.num_actions(); ++a) {
            q(s, a) = mdp.reward(s, a) + g * mdp.expected_value(s, a, v);
        }
    }
    return {std::move(v), std::move(q)};
}

Policy greedy_policy(const QTable& q) {
    Policy pi(q.num_states());
    for (int s = 0; s < q.num_states(); ++s) pi[s] = q.row_argmax(s);
    return pi;
}

ValueFunction policy_evaluation(const TabularMdp& mdp, const Policy& pi, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("policy_evaluation: tol must be positive");
    if (static_cast<int>(pi.size()) != mdp.num_states()) {
        throw std::invalid_argument("policy_evaluation: policy has wrong length");
    }
    for (int a : pi) {
        if (a < 0 || a >= mdp.num_actions()) {
            throw std::invalid_argument("policy_evaluation: invalid action index in policy");
        }
    }
    const double g = mdp.discount();
    const double stop = tol * (1.0 - g) / (2.0 * g);
    ValueFunction v(mdp.num_states(), 0.0);
    ValueFunction next(mdp.num_states());
    for (;;) {
        for (int s = 0; s < mdp.num_states(); ++s) {
            next[s] = mdp.reward(s, pi[s]) + g * mdp.expected_value(s, pi[s], v);
        }
        double d = sup_diff(next, v);
        v.swap(next);
        if (d <= stop) break;
    }
    return v;
}

ValueFunction pseudo_regret(const TabularMdp& mdp, const ValueFunction& v, const Policy& pi) {
    if (static_cast<int>(v.size()) != mdp.num_states() ||
        static_cast<int>(pi.size()) != mdp.num_states()) {
        throw std::invalid_argument("pseudo_regret: dimension mismatch");
    }
    ValueFunction phi(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s) {
        int a = pi[s];
        if (a < 0 || a >= mdp.num_actions()) {
            throw std::invalid_argument("pseudo_regret: invalid action index in policy");
        }
        phi[s] = v[s] - (mdp.reward(s, a) + mdp.discount() * mdp.expected_value(s, a, v));
    }
    return phi;
}

}  // namespace paclab
