#pragma once

#include <cstdint>
#include <random>

namespace visco {

/// Deterministic per-stream generator: the same (seed, stream) pair yields the same
/// sequence on every run and every thread layout.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

} // namespace visco
