#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "paclab/mdp.hpp"
#include "paclab/rng.hpp"

namespace paclab {

/// Single infinite trajectory through a TabularMdp. Next states are sampled
/// by inverse CDF over the stored row with one uniform draw per step, so
/// traces are reproducible across implementations.
class EnvInstance {
public:
    EnvInstance(TabularMdp mdp, int initial_state, std::uint64_t seed, std::uint64_t stream = 0);

    /// Returns (reward, next_state) and advances the current state.
    std::pair<double, int> step(int action);

    int current_state() const { return state_; }
    const TabularMdp& mdp() const { return mdp_; }

private:
    TabularMdp mdp_;
    int state_;
    PortableRng rng_;
};

/// Random MDP: each row has `branching` uniformly chosen support states with
/// Dirichlet(1,...,1) weights; rewards uniform in [0,1]. Deterministic in seed.
TabularMdp random_mdp(int num_states, int num_actions, int branching, std::uint64_t seed,
                      double discount);

/// Hard-exploration chain: "right" advances 0.35 / stays 0.6 / regresses 0.05
/// in the interior, "left" is a deterministic move left; reward 1 at the right
/// end for "right", 0.005 at the left end for "left".
TabularMdp riverswim(int num_states, double discount);

/// Needle-in-a-haystack chain: only action (s mod 2) advances from state s and
/// slips back to the start with probability `slip`; reward 1 only at the end.
TabularMdp hard_chain(int num_states, double slip, double discount);

/// Parsed environment spec, e.g. "riverswim:n=6", "random:S=5,A=2,b=3,seed=7",
/// "chain:n=8,slip=0.2". Initial state is the leftmost state for chains and
/// state 0 for random MDPs.
struct EnvSpec {
    enum class Kind { RiverSwim, Random, Chain } kind;
    int n = 0;          // riverswim / chain length
    double slip = 0.0;  // chain
    int S = 0, A = 0, b = 0;
    std::uint64_t seed = 0;  // random

    static EnvSpec parse(const std::string& text);
    std::string canonical() const;
    TabularMdp build(double discount) const;
    int initial_state() const { return 0; }
};

}  // namespace paclab
