#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "attlist/ablation.hpp"
#include "attlist/params.hpp"
#include "attlist/profiles.hpp"
#include "attlist/tape.hpp"

namespace attlist::model {

// Intermediate quantities of one scored user-list pair, for inspection and
// attention export. Score grids are row-major.
struct ForwardTrace {
    int user = 0;
    int list = 0;
    int m_items = 0;
    int n_slots = 0;

    std::vector<int> profile_lists;                  // live profile list ids
    std::vector<std::vector<int>> profile_item_ids;  // per slot: M item ids
    std::vector<std::vector<double>> profile_scores; // per slot: M x M self-attention scores
    std::vector<std::vector<double>> profile_alpha;  // per slot: M item weights
    std::vector<std::vector<double>> profile_y;      // per slot: d

    std::vector<int> cand_item_ids;   // M
    std::vector<double> cand_scores;  // M x M
    std::vector<double> cand_alpha;   // M
    std::vector<double> y_cand;       // d

    std::vector<double> list_scores;  // N x N list-level self-attention scores
    std::vector<double> beta;         // N list weights

    std::vector<double> x_u, p_u, q_l;  // d each
    double r_hat = 0.0;
};

// Per-forward runtime state: the tape, the dropout configuration and the
// drop-site counter that keeps sampled masks reproducible. Sites are
// consumed in the fixed traversal order of the forward pass.
struct RunContext {
    core::Tape& tape;
    bool training = false;
    double dropout_rate = 0.0;
    uint64_t seed = 0;
    uint64_t stream = 0;
    uint64_t site = 0;

    core::TensorPtr drop(const core::TensorPtr& x);
};

class AttListModel {
public:
    AttListModel(ParameterSet params, AblationConfig config)
        : params_(std::move(params)), config_(config) {}

    ParameterSet& params() { return params_; }
    const ParameterSet& params() const { return params_; }
    const AblationConfig& config() const { return config_; }

    enum class Level { item, list };

    // Embedding rows plus position rows for one list's item ids (id 0 = padding).
    core::TensorPtr positional_item_repr(RunContext& ctx, const std::vector<int>& item_ids) const;

    struct SelfAttnOut {
        core::TensorPtr refined;  // m x d
        core::TensorPtr scores;   // m x m (identity matrix when self-attention is off)
    };
    // Scaled dot-product self-attention over the rows of Z with residual
    // connection; mask marks live rows (padding columns are excluded from
    // the score softmax when padding masking is on).
    SelfAttnOut self_attention(RunContext& ctx, const core::TensorPtr& Z,
                               const std::vector<uint8_t>& mask, Level level) const;

    struct AggregateOut {
        core::TensorPtr vec;      // d
        core::TensorPtr weights;  // m
    };
    // Learned softmax weighting of value rows against a global context
    // vector; logits come from the refined rows. Mean pooling over live rows
    // when vanilla attention is off.
    AggregateOut vanilla_aggregate(RunContext& ctx, const core::TensorPtr& refined,
                                   const core::TensorPtr& values, const std::vector<uint8_t>& mask,
                                   Level level) const;

    struct ListRepr {
        core::TensorPtr y;       // d
        core::TensorPtr scores;  // M x M
        core::TensorPtr alpha;   // M
        bool live = true;
    };
    ListRepr list_repr(RunContext& ctx, const std::vector<int>& items,
                       const std::vector<uint8_t>& mask) const;

    struct UserRepr {
        core::TensorPtr x;       // d
        core::TensorPtr scores;  // N x N
        core::TensorPtr beta;    // N
        std::vector<ListRepr> lists;
    };
    UserRepr user_repr(RunContext& ctx, const data::ProfileExample& ex) const;
    // Same computation from precomputed per-list y vectors (evaluation path).
    UserRepr user_repr_from_ys(RunContext& ctx, const std::vector<core::TensorPtr>& ys,
                               const std::vector<uint8_t>& slot_mask) const;

    struct PredictOut {
        core::TensorPtr r;  // [1], in (0,1)
        core::TensorPtr p;  // d
        core::TensorPtr q;  // d
    };
    PredictOut predict(RunContext& ctx, const core::TensorPtr& x_u, const core::TensorPtr& y_cand,
                       int user, int list) const;

    core::TensorPtr forward(RunContext& ctx, const data::ProfileExample& ex,
                            ForwardTrace* trace = nullptr) const;

private:
    ParameterSet params_;
    AblationConfig config_;
};

// One JSON record per trace: user/list ids, row-major score grids, item and
// list attention weights. Original string ids are attached when the dataset
// is provided.
void export_attention(const ForwardTrace& trace, std::ostream& out,
                      const data::InteractionDataset* ds = nullptr);

}  // namespace attlist::model
