#pragma once

#include <cmath>
#include <cstdint>

namespace relaysim {

/// Deterministic 64-bit generator (splitmix64). The standard library's
/// distributions are implementation-defined, so all randomness in the project
/// flows through this generator to keep traces byte-identical across
/// toolchains and across reruns.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Next raw 64-bit value.
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal deviate (Box-Muller, one spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        // Guard against log(0); uniform() can return exactly 0.
        while (u1 <= 0.0) u1 = uniform();
        double mag = std::sqrt(-2.0 * std::log(u1));
        double ang = 6.28318530717958647692 * u2;
        spare_ = mag * std::sin(ang);
        has_spare_ = true;
        return mag * std::cos(ang);
    }

    /// Derive an independent sub-stream for (this seed, stream id). Used to
    /// give each tracker / Monte Carlo run its own generator so adding a
    /// consumer never perturbs the draws of another.
    static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
        Rng mixer(base ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
        return mixer.next_u64();
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace relaysim
