#include "attlist/loss.hpp"

#include "attlist/errors.hpp"

namespace attlist::train {

using core::make_tensor;
using core::TensorPtr;

TensorPtr bce_loss(core::Tape& tape, const std::vector<TensorPtr>& predictions,
                   const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw ValidationError("bce_loss: " + std::to_string(predictions.size()) +
                              " predictions vs " + std::to_string(labels.size()) + " labels");
    if (predictions.empty()) throw ValidationError("bce_loss: empty batch");
    return tape.bce_sum(tape.concat(predictions), labels);
}

TensorPtr l2_penalty(core::Tape& tape, const model::ParameterSet& params, double lambda) {
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0, got " + std::to_string(lambda));
    if (lambda == 0.0) return make_tensor({1});
    TensorPtr both = tape.add(tape.sumsq(params.attn_item_W), tape.sumsq(params.attn_list_W));
    return tape.scale(both, lambda);
}

}  // namespace attlist::train
