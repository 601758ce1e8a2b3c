#pragma once

#include <string>
#include <vector>

#include "attlist/adam.hpp"
#include "attlist/gradcheck.hpp"
#include "attlist/train_config.hpp"

namespace attlist::train {

// A parameter snapshot plus optimizer state, tagged with the model kind and
// a hash of everything that defines compatibility (model kind, dimensions,
// architecture switches, dataset extents). Loading refuses a hash mismatch
// unless forced.
struct Checkpoint {
    std::string model_kind = "attlist";  // attlist | mf | bpr
    TrainConfig config;
    int num_users = 0;
    int num_lists = 0;
    int num_items = 0;
    int epoch = 0;          // epochs completed at snapshot time
    double best_metric = 0.0;
    int best_epoch = 0;

    std::vector<core::NamedParam> tensors;
    core::AdamState adam;

    uint64_t config_hash() const;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path, uint64_t expect_hash = 0, bool force = false);
};

}  // namespace attlist::train
