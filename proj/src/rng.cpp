#include "attlist/rng.hpp"

namespace attlist::core {

namespace {

uint64_t splitmix_finalize(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

uint64_t mix_u64(uint64_t a, uint64_t b, uint64_t c) {
    uint64_t z = a + 0x9e3779b97f4a7c15ULL;
    z = splitmix_finalize(z) ^ (b + 0x9e3779b97f4a7c15ULL * 2);
    z = splitmix_finalize(z) ^ (c + 0x9e3779b97f4a7c15ULL * 3);
    return splitmix_finalize(z);
}

uint64_t stream_id(uint64_t label, uint64_t i, uint64_t j) {
    return mix_u64(label, i, j);
}

uint64_t CounterRng::next_below(uint64_t n) {
    if (n <= 1) return 0;
    const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
    uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
}

}  // namespace attlist::core
