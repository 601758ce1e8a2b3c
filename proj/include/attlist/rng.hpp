#pragma once

#include <cstdint>
#include <vector>

namespace attlist::core {

// Counter-based RNG: every draw is a pure function of (seed, stream, counter),
// so any sampled quantity can be reproduced without replaying prior draws.
// Mixing is splitmix64-style finalization over the three words.
uint64_t mix_u64(uint64_t a, uint64_t b, uint64_t c);

// Stable stream-id derivation from a label and up to two indices.
uint64_t stream_id(uint64_t label, uint64_t i = 0, uint64_t j = 0);

class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    uint64_t next_u64() { return mix_u64(seed_, stream_, counter_++); }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n), unbiased via rejection.
    uint64_t next_below(uint64_t n);

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
};

}  // namespace attlist::core
