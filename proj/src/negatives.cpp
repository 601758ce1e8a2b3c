#include "attlist/negatives.hpp"

#include <algorithm>

#include "attlist/errors.hpp"
#include "attlist/rng.hpp"

namespace attlist::data {

using attlist::core::CounterRng;
using attlist::core::stream_id;

NegativeSampler::NegativeSampler(const InteractionDataset& ds) : num_lists_(ds.num_lists) {
    train_positives_.resize(static_cast<size_t>(ds.num_users));
    all_positives_.resize(static_cast<size_t>(ds.num_users));
    for (const auto& it : ds.interactions) {
        if (it.split == Split::train)
            train_positives_[static_cast<size_t>(it.user)].push_back(it.list);
        all_positives_[static_cast<size_t>(it.user)].push_back(it.list);
    }
    for (auto& v : all_positives_) std::sort(v.begin(), v.end());
}

std::vector<int> NegativeSampler::sample(int user, int ratio, uint64_t seed,
                                         uint64_t epoch) const {
    if (ratio < 1) throw ConfigError("negative ratio must be >= 1, got " + std::to_string(ratio));
    const auto& pos = all_positives_[static_cast<size_t>(user)];
    const size_t available = static_cast<size_t>(num_lists_) - pos.size();
    const size_t want = std::min<size_t>(
        available,
        static_cast<size_t>(ratio) * train_positives_[static_cast<size_t>(user)].size());
    if (want == 0) return {};

    CounterRng rng(seed, stream_id(0x4e45, epoch, static_cast<uint64_t>(user)));

    auto is_positive = [&pos](int l) {
        return std::binary_search(pos.begin(), pos.end(), l);
    };

    std::vector<int> out;
    out.reserve(want);
    if (want * 2 >= available) {
        // Dense case: materialize the complement and take a random prefix.
        std::vector<int> pool;
        pool.reserve(available);
        for (int l = 0; l < num_lists_; ++l)
            if (!is_positive(l)) pool.push_back(l);
        rng.shuffle(pool);
        out.assign(pool.begin(), pool.begin() + static_cast<long>(want));
    } else {
        std::vector<uint8_t> taken(static_cast<size_t>(num_lists_), 0);
        while (out.size() < want) {
            const int l = static_cast<int>(rng.next_below(static_cast<uint64_t>(num_lists_)));
            if (taken[static_cast<size_t>(l)] || is_positive(l)) continue;
            taken[static_cast<size_t>(l)] = 1;
            out.push_back(l);
        }
    }
    return out;
}

}  // namespace attlist::data
