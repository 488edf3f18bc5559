#pragma once

#include <cstdint>

namespace droplab {

/// Counter-based generator: draw k of stream `key` is splitmix64(key, k).
/// Streams are reproducible from (seed, stream id) alone, independent of
/// thread count or call interleaving.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal (Box-Muller, both outputs used).
    double normal();
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace droplab
