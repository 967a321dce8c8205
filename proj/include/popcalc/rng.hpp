#pragma once

// Counter-based deterministic generator: output i is splitmix64's finalizer
// applied to seed + (i+1)*golden. Stateless apart from the counter, so jumps,
// forks and replays are trivial and results are identical across platforms.

#include <cstdint>
#include <string>

namespace popcalc {

class CounterRng {
public:
    static constexpr const char* kAlgorithm = "splitmix64-counter";

    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // [0, 1), 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // unbiased draw from [0, n)
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // independent stream derived from this seed and a label
    CounterRng fork(std::uint64_t label) const {
        CounterRng r(seed_ ^ (0x9E3779B97F4A7C15ULL + label * 0xD1342543DE82EF95ULL));
        r.next_u64();
        return CounterRng(r.next_u64());
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace popcalc
