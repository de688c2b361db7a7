#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace paclab {

// SplitMix64 step, used only to derive substream seeds from a user seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0xda942042e4dd58b5ULL;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

// Deterministic cross-platform generator: mt19937_64 is fully specified by the
// standard, and we avoid std::uniform_* distributions (their output is not).
class PortableRng {
public:
    explicit PortableRng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(derive_stream_seed(seed, stream)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound) via bitmask rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t{0};
        mask >>= __builtin_clzll(bound - 1 | 1);
        for (;;) {
            std::uint64_t v = engine_() & mask;
            if (v < bound) return v;
        }
    }

    std::string save_state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void load_state(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace paclab
