#include "attlist/profiles.hpp"

#include <algorithm>

#include "attlist/errors.hpp"

namespace attlist::data {

ProfileBuilder::ProfileBuilder(const InteractionDataset& ds, int n_slots, int m_items)
    : ds_(ds), n_(n_slots), m_(m_items) {
    if (n_ < 1 || m_ < 1)
        throw ConfigError("profile dimensions must be >= 1, got N=" + std::to_string(n_) +
                          " M=" + std::to_string(m_));
    train_lists_.resize(static_cast<size_t>(ds.num_users));
    for (const auto& it : ds.interactions)
        if (it.split == Split::train)
            train_lists_[static_cast<size_t>(it.user)].push_back(it.list);
}

void ProfileBuilder::padded_list(int list, std::vector<int>& items,
                                 std::vector<uint8_t>& mask) const {
    const auto& seq = ds_.containment[static_cast<size_t>(list)];
    const int live = std::min<int>(m_, static_cast<int>(seq.size()));
    items.assign(static_cast<size_t>(m_), 0);
    mask.assign(static_cast<size_t>(m_), 0);
    for (int i = 0; i < live; ++i) {
        items[static_cast<size_t>(i)] = seq[static_cast<size_t>(i)];
        mask[static_cast<size_t>(i)] = 1;
    }
}

ProfileExample ProfileBuilder::build(int user, int list, int label) const {
    ProfileExample ex;
    ex.user = user;
    ex.list = list;
    ex.label = label;

    const auto& all = train_lists_[static_cast<size_t>(user)];
    std::vector<int> pool;
    pool.reserve(all.size());
    for (int l : all)
        if (!(label == 1 && l == list)) pool.push_back(l);

    // Keep the N most recent, preserving chronological order.
    const size_t keep = std::min<size_t>(pool.size(), static_cast<size_t>(n_));
    ex.profile_lists.assign(pool.end() - static_cast<long>(keep), pool.end());

    ex.profile_items.resize(static_cast<size_t>(n_));
    ex.profile_item_mask.resize(static_cast<size_t>(n_));
    ex.profile_slot_mask.assign(static_cast<size_t>(n_), 0);
    for (int s = 0; s < n_; ++s) {
        if (s < static_cast<int>(ex.profile_lists.size())) {
            padded_list(ex.profile_lists[static_cast<size_t>(s)],
                        ex.profile_items[static_cast<size_t>(s)],
                        ex.profile_item_mask[static_cast<size_t>(s)]);
            // A list emptied by item filtering yields an all-padding row; its
            // slot only counts when it has at least one live item.
            bool any = false;
            for (uint8_t v : ex.profile_item_mask[static_cast<size_t>(s)]) any |= (v != 0);
            ex.profile_slot_mask[static_cast<size_t>(s)] = any ? 1 : 0;
        } else {
            ex.profile_items[static_cast<size_t>(s)].assign(static_cast<size_t>(m_), 0);
            ex.profile_item_mask[static_cast<size_t>(s)].assign(static_cast<size_t>(m_), 0);
        }
    }

    padded_list(list, ex.cand_items, ex.cand_mask);
    return ex;
}

}  // namespace attlist::data
