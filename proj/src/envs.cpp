#include "paclab/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace paclab {

EnvInstance::EnvInstance(TabularMdp mdp, int initial_state, std::uint64_t seed, std::uint64_t stream)
    : mdp_(std::move(mdp)), state_(initial_state), rng_(seed, stream) {
    if (initial_state < 0 || initial_state >= mdp_.num_states()) {
        throw std::invalid_argument("EnvInstance: invalid initial state");
    }
}

std::pair<double, int> EnvInstance::step(int action) {
    if (action < 0 || action >= mdp_.num_actions()) {
        throw std::invalid_argument("step: invalid action");
    }
    const double reward = mdp_.reward(state_, action);
    auto row = mdp_.transition_row(state_, action);
    const double u = rng_.uniform();
    double cum = 0.0;
    int next = mdp_.num_states() - 1;
    for (int j = 0; j < mdp_.num_states(); ++j) {
        cum += row[j];
        if (u < cum) {
            next = j;
            break;
        }
    }
    state_ = next;
    return {reward, next};
}

TabularMdp random_mdp(int num_states, int num_actions, int branching, std::uint64_t seed,
                      double discount) {
    if (num_states < 1 || num_actions < 1) {
        throw std::invalid_argument("random_mdp: dimensions must be positive");
    }
    if (branching < 1 || branching > num_states) {
        throw std::invalid_argument("random_mdp: branching must lie in [1, num_states]");
    }
    PortableRng rng(seed, /*stream=*/0x6d6470ULL);  // generator stream, separate from run streams
    std::vector<double> transitions(
        static_cast<std::size_t>(num_states) * num_actions * num_states, 0.0);
    std::vector<double> rewards(static_cast<std::size_t>(num_states) * num_actions, 0.0);
    std::vector<int> support(num_states);
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            std::iota(support.begin(), support.end(), 0);
            // Partial Fisher-Yates for the support set.
            for (int i = 0; i < branching; ++i) {
                int j = i + static_cast<int>(rng.uniform_below(num_states - i));
                std::swap(support[i], support[j]);
            }
            // Dirichlet(1,..,1) weights via normalized exponentials.
            std::vector<double> w(branching);
            double total = 0.0;
            for (int i = 0; i < branching; ++i) {
                w[i] = -std::log1p(-rng.uniform());
                total += w[i];
            }
            double* row = transitions.data() +
                          (static_cast<std::size_t>(s) * num_actions + a) * num_states;
            for (int i = 0; i < branching; ++i) row[support[i]] = w[i] / total;
            rewards[static_cast<std::size_t>(s) * num_actions + a] = rng.uniform();
        }
    }
    return TabularMdp(num_states, num_actions, std::move(transitions), std::move(rewards), discount);
}

TabularMdp riverswim(int num_states, double discount) {
    if (num_states < 2) throw std::invalid_argument("riverswim: need at least 2 states");
    const int S = num_states;
    const int A = 2;  // 0 = left, 1 = right
    std::vector<double> transitions(static_cast<std::size_t>(S) * A * S, 0.0);
    std::vector<double> rewards(static_cast<std::size_t>(S) * A, 0.0);
    auto row = [&](int s, int a) {
        return transitions.data() + (static_cast<std::size_t>(s) * A + a) * S;
    };
    for (int s = 0; s < S; ++s) {
        row(s, 0)[std::max(0, s - 1)] = 1.0;  // left: deterministic move left
        double* r = row(s, 1);
        if (s == 0) {
            r[1] = 0.35;
            r[0] = 0.65;
        } else if (s == S - 1) {
            r[s] = 0.95;
            r[s - 1] = 0.05;
        } else {
            r[s + 1] = 0.35;
            r[s] = 0.6;
            r[s - 1] = 0.05;
        }
    }
    rewards[0 * A + 0] = 5.0 / 1000.0;
    rewards[static_cast<std::size_t>(S - 1) * A + 1] = 1.0;
    return TabularMdp(S, A, std::move(transitions), std::move(rewards), discount);
}

TabularMdp hard_chain(int num_states, double slip, double discount) {
    if (num_states < 2) throw std::invalid_argument("hard_chain: need at least 2 states");
    if (!(slip >= 0.0) || slip >= 0.5) {
        throw std::invalid_argument("hard_chain: slip must lie in [0, 0.5)");
    }
    const int S = num_states;
    const int A = 2;
    std::vector<double> transitions(static_cast<std::size_t>(S) * A * S, 0.0);
    std::vector<double> rewards(static_cast<std::size_t>(S) * A, 0.0);
    auto row = [&](int s, int a) {
        return transitions.data() + (static_cast<std::size_t>(s) * A + a) * S;
    };
    for (int s = 0; s < S; ++s) {
        int advance = s % 2;
        for (int a = 0; a < A; ++a) {
            if (a != advance) {
                row(s, a)[s] = 1.0;
            } else if (s == S - 1) {
                row(s, a)[s] = 1.0;
                rewards[static_cast<std::size_t>(s) * A + a] = 1.0;
            } else if (slip == 0.0) {
                row(s, a)[s + 1] = 1.0;
            } else {
                row(s, a)[s + 1] = 1.0 - slip;
                row(s, a)[0] += slip;
            }
        }
    }
    return TabularMdp(S, A, std::move(transitions), std::move(rewards), discount);
}

namespace {

[[noreturn]] void spec_error(const std::string& text, const std::string& detail) {
    throw std::invalid_argument(
        "invalid environment spec '" + text + "': " + detail +
        "; expected one of riverswim:n=<int>, random:S=<int>,A=<int>,b=<int>,seed=<int>, "
        "chain:n=<int>,slip=<real>");
}

}  // namespace

EnvSpec EnvSpec::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    EnvSpec spec;
    if (name == "riverswim") {
        spec.kind = Kind::RiverSwim;
    } else if (name == "random") {
        spec.kind = Kind::Random;
    } else if (name == "chain") {
        spec.kind = Kind::Chain;
    } else {
        spec_error(text, "unknown environment '" + name + "'");
    }

    bool have_n = false, have_slip = false, have_S = false, have_A = false, have_b = false,
         have_seed = false;
    if (colon != std::string::npos) {
        std::istringstream rest(text.substr(colon + 1));
        std::string item;
        while (std::getline(rest, item, ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos) spec_error(text, "expected key=value, got '" + item + "'");
            std::string key = item.substr(0, eq);
            std::string value = item.substr(eq + 1);
            try {
                if (key == "n") {
                    spec.n = std::stoi(value);
                    have_n = true;
                } else if (key == "slip") {
                    spec.slip = std::stod(value);
                    have_slip = true;
                } else if (key == "S") {
                    spec.S = std::stoi(value);
                    have_S = true;
                } else if (key == "A") {
                    spec.A = std::stoi(value);
                    have_A = true;
                } else if (key == "b") {
                    spec.b = std::stoi(value);
                    have_b = true;
                } else if (key == "seed") {
                    spec.seed = std::stoull(value);
                    have_seed = true;
                } else {
                    spec_error(text, "unknown parameter '" + key + "'");
                }
            } catch (const std::invalid_argument&) {
                spec_error(text, "could not parse value '" + value + "' for '" + key + "'");
            } catch (const std::out_of_range&) {
                spec_error(text, "value out of range for '" + key + "'");
            }
        }
    }

    switch (spec.kind) {
        case Kind::RiverSwim:
            if (!have_n) spec_error(text, "riverswim requires n");
            break;
        case Kind::Random:
            if (!have_S || !have_A || !have_b || !have_seed) {
                spec_error(text, "random requires S, A, b, seed");
            }
            break;
        case Kind::Chain:
            if (!have_n || !have_slip) spec_error(text, "chain requires n and slip");
            break;
    }
    return spec;
}

std::string EnvSpec::canonical() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::RiverSwim:
            os << "riverswim:n=" << n;
            break;
        case Kind::Random:
            os << "random:S=" << S << ",A=" << A << ",b=" << b << ",seed=" << seed;
            break;
        case Kind::Chain:
            os << "chain:n=" << n << ",slip=" << slip;
            break;
    }
    return os.str();
}

TabularMdp EnvSpec::build(double discount) const {
    switch (kind) {
        case Kind::RiverSwim:
            return riverswim(n, discount);
        case Kind::Random:
            return random_mdp(S, A, b, seed, discount);
        case Kind::Chain:
            return hard_chain(n, slip, discount);
    }
    throw std::logic_error("EnvSpec::build: unreachable");
}

}  // namespace paclab
