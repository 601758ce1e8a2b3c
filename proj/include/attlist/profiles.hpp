#pragma once

#include <cstdint>
#include <vector>

#include "attlist/dataset.hpp"

namespace attlist::data {

// One padded training/evaluation example: the candidate list as an M-vector
// of item ids and the user profile as an N x M matrix of item ids, with
// masks. Id 0 is the padding item; masks are 1 for live positions.
struct ProfileExample {
    int user = 0;
    int list = 0;
    int label = 0;

    std::vector<int> profile_lists;                    // live profile list ids (<= N)
    std::vector<std::vector<int>> profile_items;       // N rows of M ids
    std::vector<std::vector<uint8_t>> profile_item_mask;  // N rows of M
    std::vector<uint8_t> profile_slot_mask;            // N

    std::vector<int> cand_items;                       // M ids
    std::vector<uint8_t> cand_mask;                    // M
};

// Builds padded examples from a split dataset. List vectors keep the
// earliest M items in curation order; user profiles keep the N most recent
// train-split lists (file order is the recency surrogate). When the
// candidate is one of the user's train positives and label=1, it is removed
// from the profile before the N-most-recent cut.
class ProfileBuilder {
public:
    ProfileBuilder(const InteractionDataset& ds, int n_slots, int m_items);

    ProfileExample build(int user, int list, int label) const;

    // Train-split lists of a user, file order.
    const std::vector<int>& train_lists(int user) const {
        return train_lists_[static_cast<size_t>(user)];
    }

    int n_slots() const { return n_; }
    int m_items() const { return m_; }

    // Earliest-M truncation + padding of one list.
    void padded_list(int list, std::vector<int>& items, std::vector<uint8_t>& mask) const;

private:
    const InteractionDataset& ds_;
    int n_;
    int m_;
    std::vector<std::vector<int>> train_lists_;
};

}  // namespace attlist::data
