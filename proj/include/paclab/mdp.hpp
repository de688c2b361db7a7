#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace paclab {

/// clip(x, y) = x when x >= y, else 0. Throws std::invalid_argument on
/// non-finite input.
double clip(double x, double threshold);

using ValueFunction = std::vector<double>;
using Policy = std::vector<int>;

// Dense S x A table, row-major.
class QTable {
public:
    QTable() = default;
    QTable(int num_states, int num_actions, double fill = 0.0);

    int num_states() const { return states_; }
    int num_actions() const { return actions_; }

    double operator()(int s, int a) const { return values_[static_cast<std::size_t>(s) * actions_ + a]; }
    double& operator()(int s, int a) { return values_[static_cast<std::size_t>(s) * actions_ + a]; }

    std::span<const double> row(int s) const {
        return {values_.data() + static_cast<std::size_t>(s) * actions_, static_cast<std::size_t>(actions_)};
    }

    // Lowest index wins ties, everywhere in this project.
    int row_argmax(int s) const;
    double row_max(int s) const;

    const std::vector<double>& data() const { return values_; }
    std::vector<double>& data() { return values_; }

private:
    int states_ = 0;
    int actions_ = 0;
    std::vector<double> values_;
};

/// Ground-truth tabular MDP: dense transition rows, deterministic rewards in
/// [0,1], discount in (0,1). Rows whose sum is within 1e-9 of 1 are
/// renormalized at construction; anything worse is rejected rather than
/// silently fixed.
class TabularMdp {
public:
    TabularMdp(int num_states, int num_actions, std::vector<double> transitions,
               std::vector<double> rewards, double discount);

    int num_states() const { return states_; }
    int num_actions() const { return actions_; }
    double discount() const { return discount_; }
    double vmax() const { return 1.0 / (1.0 - discount_); }

    double reward(int s, int a) const { return rewards_[static_cast<std::size_t>(s) * actions_ + a]; }
    std::span<const double> transition_row(int s, int a) const {
        return {transitions_.data() + (static_cast<std::size_t>(s) * actions_ + a) * states_,
                static_cast<std::size_t>(states_)};
    }

    const std::vector<double>& transitions() const { return transitions_; }
    const std::vector<double>& rewards() const { return rewards_; }

    double expected_value(int s, int a, const ValueFunction& v) const;

private:
    int states_ = 0;
    int actions_ = 0;
    double discount_ = 0.0;
    std::vector<double> transitions_;  // S*A*S
    std::vector<double> rewards_;      // S*A
};

struct OptimalSolution {
    ValueFunction values;
    QTable q;
};

ValueFunction bellman_optimality_backup(const TabularMdp& mdp, const ValueFunction& v);

/// Value iteration until successive iterates differ by <= tol*(1-g)/(2g) in
/// sup norm, which certifies a sup-norm error <= tol for both outputs.
OptimalSolution optimal_values(const TabularMdp& mdp, double tol);

Policy greedy_policy(const QTable& q);

/// Iterative policy evaluation with the same certified stopping rule; a pure
/// cold-start function of (mdp, pi, tol) so repeated calls are bit-identical.
ValueFunction policy_evaluation(const TabularMdp& mdp, const Policy& pi, double tol);

/// phi(s) = v(s) - (r(s,pi(s)) + g * P_{s,pi(s)} v). May be negative.
ValueFunction pseudo_regret(const TabularMdp& mdp, const ValueFunction& v, const Policy& pi);

}  // namespace paclab
