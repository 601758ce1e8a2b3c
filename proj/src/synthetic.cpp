#include "attlist/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "attlist/errors.hpp"
#include "attlist/rng.hpp"

namespace attlist::data {

using attlist::core::CounterRng;
using attlist::core::stream_id;

namespace {

// Truncated discrete power law on [lo, hi]: P(k) proportional to k^(-exponent).
class PowerLaw {
public:
    PowerLaw(int lo, int hi, double exponent) : lo_(lo) {
        cum_.reserve(static_cast<size_t>(hi - lo + 1));
        double total = 0.0;
        for (int k = lo; k <= hi; ++k) {
            total += std::pow(static_cast<double>(k), -exponent);
            cum_.push_back(total);
        }
    }

    int sample(CounterRng& rng) const {
        const double x = rng.next_double() * cum_.back();
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), x);
        return lo_ + static_cast<int>(it - cum_.begin());
    }

private:
    int lo_;
    std::vector<double> cum_;
};

// Zipf-weighted pick from a pool: entry at rank r has weight (r+1)^(-1).
int zipf_pick(const std::vector<int>& pool, const std::vector<double>& cum, CounterRng& rng) {
    const double x = rng.next_double() * cum[pool.size() - 1];
    const auto it = std::upper_bound(cum.begin(), cum.begin() + static_cast<long>(pool.size()), x);
    return pool[static_cast<size_t>(it - cum.begin())];
}

constexpr double kInTopicContentRate = 0.9;

}  // namespace

InteractionDataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.users <= 0 || spec.lists <= 0 || spec.items <= 0)
        throw ConfigError("synthetic spec counts must be positive");
    if (spec.topics < 1) throw ConfigError("topic count must be >= 1");
    if (spec.topics > spec.lists)
        throw ConfigError("topic count " + std::to_string(spec.topics) + " exceeds list count " +
                          std::to_string(spec.lists));
    if (spec.noise < 0.0 || spec.noise > 1.0)
        throw ConfigError("noise rate must be in [0,1], got " + std::to_string(spec.noise));

    InteractionDataset ds;
    ds.num_users = spec.users;
    ds.num_lists = spec.lists;
    ds.num_items = spec.items;
    ds.user_ids.reserve(static_cast<size_t>(spec.users));
    for (int u = 0; u < spec.users; ++u) ds.user_ids.push_back("u" + std::to_string(u));
    ds.list_ids.reserve(static_cast<size_t>(spec.lists));
    for (int l = 0; l < spec.lists; ++l) ds.list_ids.push_back("l" + std::to_string(l));
    ds.item_ids.reserve(static_cast<size_t>(spec.items) + 1);
    ds.item_ids.push_back("<pad>");
    for (int t = 1; t <= spec.items; ++t) ds.item_ids.push_back("i" + std::to_string(t));

    // Topic assignment; real item ids are 1..items.
    std::vector<std::vector<int>> items_by_topic(static_cast<size_t>(spec.topics));
    {
        CounterRng rng(spec.seed, stream_id(0x11));
        for (int i = 1; i <= spec.items; ++i)
            items_by_topic[rng.next_below(static_cast<uint64_t>(spec.topics))].push_back(i);
    }
    std::vector<int> list_topic(static_cast<size_t>(spec.lists));
    std::vector<std::vector<int>> lists_by_topic(static_cast<size_t>(spec.topics));
    {
        CounterRng rng(spec.seed, stream_id(0x12));
        for (int l = 0; l < spec.lists; ++l) {
            const int t = static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.topics)));
            list_topic[static_cast<size_t>(l)] = t;
            lists_by_topic[static_cast<size_t>(t)].push_back(l);
        }
    }

    // List contents.
    ds.containment.resize(static_cast<size_t>(spec.lists));
    const PowerLaw length_law(std::min(2, spec.items), std::min(60, spec.items),
                              spec.list_length_exponent);
    for (int l = 0; l < spec.lists; ++l) {
        CounterRng rng(spec.seed, stream_id(0x13, static_cast<uint64_t>(l)));
        const int len = length_law.sample(rng);
        const auto& topic_pool = items_by_topic[static_cast<size_t>(list_topic[static_cast<size_t>(l)])];
        auto& seq = ds.containment[static_cast<size_t>(l)];
        std::unordered_set<int> used;
        int attempts = 0;
        const int max_attempts = 50 * len;
        while (static_cast<int>(seq.size()) < len && attempts++ < max_attempts) {
            int item;
            if (!topic_pool.empty() && rng.next_double() < kInTopicContentRate)
                item = topic_pool[rng.next_below(topic_pool.size())];
            else
                item = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.items)));
            if (used.insert(item).second) seq.push_back(item);
        }
    }

    // Zipf cumulative weights shared across topic pools; lists earlier in a
    // topic's pool are more popular.
    size_t max_pool = 1;
    for (const auto& p : lists_by_topic) max_pool = std::max(max_pool, p.size());
    std::vector<double> zipf_cum;
    zipf_cum.reserve(max_pool);
    {
        double total = 0.0;
        for (size_t r = 0; r < max_pool; ++r) {
            total += 1.0 / static_cast<double>(r + 1);
            zipf_cum.push_back(total);
        }
    }

    // Interactions.
    const PowerLaw activity_law(1, std::max(1, std::min(100, spec.lists / 2)),
                                spec.user_activity_exponent);
    for (int u = 0; u < spec.users; ++u) {
        CounterRng rng(spec.seed, stream_id(0x14, static_cast<uint64_t>(u)));
        std::vector<int> preferred;
        preferred.push_back(static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.topics))));
        if (spec.topics > 1 && rng.next_double() < 0.5) {
            int second = preferred[0];
            while (second == preferred[0])
                second = static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.topics)));
            preferred.push_back(second);
        }

        const int target = activity_law.sample(rng);
        std::unordered_set<int> used;
        int attempts = 0;
        const int max_attempts = 100 * target;
        while (static_cast<int>(used.size()) < target && attempts++ < max_attempts) {
            int list;
            if (rng.next_double() < spec.noise) {
                list = static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.lists)));
            } else {
                const int t = preferred[preferred.size() == 1 ? 0 : rng.next_below(2)];
                const auto& pool = lists_by_topic[static_cast<size_t>(t)];
                if (pool.empty())
                    list = static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.lists)));
                else
                    list = zipf_pick(pool, zipf_cum, rng);
            }
            if (used.insert(list).second) ds.interactions.push_back({u, list, Split::train});
        }
    }
    return ds;
}

}  // namespace attlist::data
