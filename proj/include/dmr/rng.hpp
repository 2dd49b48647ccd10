#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace dmr {

/// Deterministic 64-bit generator (splitmix64). All randomness in the project
/// flows from one top-level seed through named substreams, so any component
/// can be re-seeded independently of the order other components draw in.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Uniform integer in [0, n). Debiased via 128-bit multiply-shift.
    std::uint64_t next_below(std::uint64_t n);

    bool next_bernoulli(double p) { return next_unit() < p; }

    /// Index drawn proportionally to `weights` (need not be normalized).
    std::size_t next_categorical(const std::vector<double>& weights);

private:
    std::uint64_t state_;
};

std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                             std::uint64_t a = 0, std::uint64_t b = 0);

inline Rng substream(std::uint64_t seed, std::string_view name,
                     std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(substream_seed(seed, name, a, b));
}

}  // namespace dmr
