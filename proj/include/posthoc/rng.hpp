#pragma once

#include <cstdint>

namespace posthoc {

// SplitMix64 finalizer. Bijective on 64-bit words, so feeding it a counter
// sequence yields a counter-based generator: output i depends only on
// (key, i), never on how many draws came before.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Counter-based generator. Streams derived from (seed, stream index) agree
/// bit-for-bit whether replications run serially or in parallel.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t key) : key_(key), counter_(0) {}

    static CounterRng stream(std::uint64_t seed, std::uint64_t stream_index) {
        return CounterRng(splitmix64(seed) ^ splitmix64(splitmix64(stream_index) + 0x1D8AF066ULL));
    }

    std::uint64_t next_u64() { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

    /// Uniform draw in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform draw in (0, 1); never returns an exact 0.
    double next_open_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace posthoc
