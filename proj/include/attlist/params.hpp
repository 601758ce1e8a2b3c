#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attlist/gradcheck.hpp"
#include "attlist/tensor.hpp"

namespace attlist::model {

struct ModelDims {
    int num_items = 0;  // real items; embedding table has num_items+1 rows
    int num_users = 0;
    int num_lists = 0;
    int d = 0;   // latent dimensionality
    int D = 0;   // predictive factors (hidden width of the prediction net)
    int M = 0;   // items per list
    bool linear_projections = false;

    bool operator==(const ModelDims&) const = default;
};

// All learnable arrays. Row 0 of item_emb is the padding item and is held at
// exactly zero (its gradient is cleared after every backward pass).
struct ParameterSet {
    ModelDims dims;

    core::TensorPtr item_emb;  // (|T|+1) x d
    core::TensorPtr pos_emb;   // M x d

    core::TensorPtr attn_item_W, attn_item_b, attn_item_u;  // d x d, d, d
    core::TensorPtr attn_list_W, attn_list_b, attn_list_u;

    core::TensorPtr user_emb;  // |U| x d
    core::TensorPtr list_emb;  // |L| x d

    core::TensorPtr W1, b1;  // D x 3d, D
    core::TensorPtr w2, b2;  // D, 1

    // Present only when dims.linear_projections.
    core::TensorPtr proj_item_q, proj_item_k, proj_item_v;  // d x d each
    core::TensorPtr proj_list_q, proj_list_k, proj_list_v;

    static ParameterSet init(const ModelDims& dims, uint64_t seed);

    std::vector<core::TensorPtr> all() const;
    std::vector<core::NamedParam> named() const;

    void zero_grads();
    // Clears the gradient of the padding embedding row; with zero moments
    // the row then never moves under Adam.
    void freeze_padding_row();
};

}  // namespace attlist::model
