#pragma once

#include <vector>

#include "attlist/params.hpp"
#include "attlist/tape.hpp"

namespace attlist::train {

// Summed binary cross-entropy over per-example prediction tensors (each a
// single-element tensor in (0,1)); gradient flows back to the predictions.
core::TensorPtr bce_loss(core::Tape& tape, const std::vector<core::TensorPtr>& predictions,
                         const std::vector<int>& labels);

// lambda * (||W_I||_F^2 + ||W_L||_F^2): only the vanilla-attention weight
// matrices are regularized.
core::TensorPtr l2_penalty(core::Tape& tape, const model::ParameterSet& params, double lambda);

}  // namespace attlist::train
