#pragma once

#include <functional>
#include <string>
#include <vector>

#include "attlist/tape.hpp"
#include "attlist/tensor.hpp"

namespace attlist::core {

struct NamedParam {
    std::string name;
    TensorPtr tensor;
};

struct GradCheckEntry {
    std::string name;
    double max_rel_error = 0.0;
    size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_error = 0.0;
    std::string worst_param;
};

// Compares tape gradients against central finite differences, elementwise.
// build_loss must rebuild the loss from the current parameter values on the
// given tape and be deterministic (dropout off); two value-only evaluations
// are compared first and a DeterminismError is thrown if they disagree.
// Relative error is |g_a - g_n| / max(1, |g_a|, |g_n|).
GradCheckReport gradient_check(const std::function<TensorPtr(Tape&)>& build_loss,
                               const std::vector<NamedParam>& params, double step);

}  // namespace attlist::core
