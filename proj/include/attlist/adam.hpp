#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attlist/tensor.hpp"

namespace attlist::core {

struct AdamHyper {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Per-parameter first/second moment accumulators plus the shared step count.
// Moment buffers are zero-initialized and parallel to the parameter list the
// state was created for.
struct AdamState {
    AdamHyper hyper;
    int64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    static AdamState init(const std::vector<TensorPtr>& params, AdamHyper hyper);
};

// One bias-corrected Adam update over all parameters; gradients are cleared
// afterward. Throws GradientError if a parameter has no gradient buffer.
void adam_step(std::vector<TensorPtr>& params, AdamState& state);

}  // namespace attlist::core
