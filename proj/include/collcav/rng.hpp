#ifndef COLLCAV_RNG_HPP
#define COLLCAV_RNG_HPP

#include <cstdint>

namespace collcav {

// SplitMix64 used in counter mode: the k-th draw of stream s is a pure
// function of (s, k), so trajectories can be recomputed or reordered without
// changing any draw. Reference: Steele, Lea, Flood, "Fast splittable
// pseudorandom number generators" (the same mixer ships in java.util
// .SplittableRandom).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream)
        : base_(splitmix64(master_seed ^ splitmix64(stream))) {}

    // k-th 64-bit word of this stream.
    std::uint64_t word(std::uint64_t k) const { return splitmix64(base_ + k); }

    // Next uniform in (0, 1); 53-bit mantissa, never exactly 0.
    double next_uniform() {
        std::uint64_t w = word(counter_++);
        return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

}  // namespace collcav

#endif
