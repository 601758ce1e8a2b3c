#pragma once

#include <cstdint>
#include <vector>

#include "attlist/dataset.hpp"

namespace attlist::data {

// Uniform negative sampler over the lists a user never interacted with in
// any split. Draws are a pure function of (seed, epoch, user), so each epoch
// resamples a fresh set and every epoch is reproducible in isolation.
class NegativeSampler {
public:
    explicit NegativeSampler(const InteractionDataset& ds);

    // min(ratio * |train positives|, available) distinct negative lists.
    // Returns an empty vector when the user has no candidate negatives.
    std::vector<int> sample(int user, int ratio, uint64_t seed, uint64_t epoch) const;

    const std::vector<int>& train_positives(int user) const {
        return train_positives_[static_cast<size_t>(user)];
    }
    const std::vector<int>& all_positives(int user) const {
        return all_positives_[static_cast<size_t>(user)];
    }

private:
    int num_lists_;
    std::vector<std::vector<int>> train_positives_;  // file order
    std::vector<std::vector<int>> all_positives_;    // sorted, for lookup
};

}  // namespace attlist::data
