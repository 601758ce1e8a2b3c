#include "attlist/model.hpp"

#include <cmath>
#include <ostream>

#include <json.hpp>

#include "attlist/errors.hpp"
#include "attlist/rng.hpp"

namespace attlist::model {

using core::make_tensor;
using core::Tensor;
using core::TensorPtr;
using nlohmann::json;

std::vector<std::string> ablation_variant_names() {
    return {"full",
            "-VanillaAttention",
            "-SelfAttention",
            "-AttentionMechanism",
            "-ResidualConnections",
            "-PositionInformation",
            "-IDEmbedding",
            "+LinearProjections"};
}

AblationConfig ablation_variant(const std::string& name) {
    AblationConfig c;
    if (name == "full") return c;
    if (name == "-VanillaAttention") {
        c.use_vanilla_attention = false;
        return c;
    }
    if (name == "-SelfAttention") {
        c.use_self_attention = false;
        return c;
    }
    if (name == "-AttentionMechanism") {
        c.use_vanilla_attention = false;
        c.use_self_attention = false;
        return c;
    }
    if (name == "-ResidualConnections") {
        c.use_residual = false;
        return c;
    }
    if (name == "-PositionInformation") {
        c.use_position = false;
        return c;
    }
    if (name == "-IDEmbedding") {
        c.use_id_embeddings = false;
        return c;
    }
    if (name == "+LinearProjections") {
        c.use_linear_projections = true;
        return c;
    }
    std::string all;
    for (const auto& n : ablation_variant_names()) all += (all.empty() ? "" : ", ") + n;
    throw ConfigError("unknown ablation variant '" + name + "' (valid: " + all + ")");
}

TensorPtr RunContext::drop(const TensorPtr& x) {
    return tape.dropout(x, dropout_rate, training, seed, core::stream_id(0x64726f70, stream, site++));
}

namespace {

bool any_live(const std::vector<uint8_t>& mask) {
    for (uint8_t v : mask)
        if (v) return true;
    return false;
}

int live_count(const std::vector<uint8_t>& mask) {
    int n = 0;
    for (uint8_t v : mask) n += v ? 1 : 0;
    return n;
}

// Column mask replicated across rows, or empty when nothing is masked.
std::vector<uint8_t> column_mask(const std::vector<uint8_t>& mask) {
    const size_t m = mask.size();
    bool all = true;
    for (uint8_t v : mask) all &= (v != 0);
    if (all) return {};
    std::vector<uint8_t> out(m * m);
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) out[i * m + j] = mask[j];
    return out;
}

TensorPtr identity_matrix(int m) {
    TensorPtr t = make_tensor({m, m});
    for (int i = 0; i < m; ++i) t->at(i, i) = 1.0;
    return t;
}

}  // namespace

TensorPtr AttListModel::positional_item_repr(RunContext& ctx,
                                             const std::vector<int>& item_ids) const {
    TensorPtr e = ctx.tape.gather_rows(params_.item_emb, item_ids);
    e = ctx.drop(e);
    if (!config_.use_position) return e;
    std::vector<int> positions(item_ids.size());
    for (size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
    TensorPtr o = ctx.tape.gather_rows(params_.pos_emb, positions);
    o = ctx.drop(o);
    return ctx.tape.add(e, o);
}

AttListModel::SelfAttnOut AttListModel::self_attention(RunContext& ctx, const TensorPtr& Z,
                                                       const std::vector<uint8_t>& mask,
                                                       Level level) const {
    const int m = Z->rows();
    if (!mask.empty() && static_cast<int>(mask.size()) != m)
        throw DimensionError("self_attention: mask length " + std::to_string(mask.size()) +
                             " vs " + std::to_string(m) + " rows");
    if (config_.mask_padding && !mask.empty() && !any_live(mask))
        throw DegenerateInputError("self_attention: all rows masked");

    if (!config_.use_self_attention) return {Z, identity_matrix(m)};

    TensorPtr q = Z, k = Z, v = Z;
    if (config_.use_linear_projections) {
        const bool item = level == Level::item;
        q = ctx.tape.matmul(Z, item ? params_.proj_item_q : params_.proj_list_q);
        k = ctx.tape.matmul(Z, item ? params_.proj_item_k : params_.proj_list_k);
        v = ctx.tape.matmul(Z, item ? params_.proj_item_v : params_.proj_list_v);
    }

    TensorPtr s = ctx.tape.matmul_nt(q, k);
    s = ctx.tape.scale(s, 1.0 / std::sqrt(static_cast<double>(params_.dims.d)));
    TensorPtr scores =
        ctx.tape.row_softmax(s, config_.mask_padding ? column_mask(mask) : std::vector<uint8_t>{});
    TensorPtr dropped = ctx.drop(scores);
    TensorPtr mixed = ctx.tape.matmul(dropped, v);
    TensorPtr out = config_.use_residual ? ctx.tape.add(Z, mixed) : mixed;
    return {out, scores};
}

AttListModel::AggregateOut AttListModel::vanilla_aggregate(RunContext& ctx,
                                                           const TensorPtr& refined,
                                                           const TensorPtr& values,
                                                           const std::vector<uint8_t>& mask,
                                                           Level level) const {
    const int m = refined->rows();
    if (values->rows() != m || values->cols() != refined->cols())
        throw DimensionError("vanilla_aggregate: refined " + refined->shape_str() +
                             " vs values " + values->shape_str());
    const bool masked = config_.mask_padding && !mask.empty();
    if (masked && !any_live(mask))
        throw DegenerateInputError("vanilla_aggregate: all rows masked");

    TensorPtr weights;
    if (!config_.use_vanilla_attention) {
        // Mean pooling over live rows.
        weights = make_tensor({m});
        const int live = masked ? live_count(mask) : m;
        for (int i = 0; i < m; ++i)
            weights->at(i) = (!masked || mask[static_cast<size_t>(i)]) ? 1.0 / live : 0.0;
    } else {
        const bool item = level == Level::item;
        const TensorPtr& W = item ? params_.attn_item_W : params_.attn_list_W;
        const TensorPtr& b = item ? params_.attn_item_b : params_.attn_list_b;
        const TensorPtr& u = item ? params_.attn_item_u : params_.attn_list_u;
        TensorPtr t = ctx.tape.matmul_nt(refined, W);
        t = ctx.tape.add_rowvec(t, b);
        t = ctx.tape.tanh(t);
        TensorPtr logits = ctx.tape.matvec(t, u);
        weights = ctx.tape.row_softmax(logits, masked ? mask : std::vector<uint8_t>{});
    }
    return {ctx.tape.weighted_sum_rows(values, weights), weights};
}

AttListModel::ListRepr AttListModel::list_repr(RunContext& ctx, const std::vector<int>& items,
                                               const std::vector<uint8_t>& mask) const {
    const int m = static_cast<int>(items.size());
    if (config_.mask_padding && !any_live(mask)) {
        ListRepr out;
        out.y = make_tensor({params_.dims.d});
        out.scores = make_tensor({m, m});
        out.alpha = make_tensor({m});
        out.live = false;
        return out;
    }
    TensorPtr z = positional_item_repr(ctx, items);
    SelfAttnOut sa = self_attention(ctx, z, mask, Level::item);
    AggregateOut agg = vanilla_aggregate(ctx, sa.refined, sa.refined, mask, Level::item);
    ListRepr out;
    out.y = ctx.drop(agg.vec);
    out.scores = sa.scores;
    out.alpha = agg.weights;
    out.live = true;
    return out;
}

AttListModel::UserRepr AttListModel::user_repr_from_ys(RunContext& ctx,
                                                       const std::vector<TensorPtr>& ys,
                                                       const std::vector<uint8_t>& slot_mask)
    const {
    const int n = static_cast<int>(ys.size());
    UserRepr out;
    if (config_.mask_padding && !any_live(slot_mask)) {
        out.x = make_tensor({params_.dims.d});
        out.scores = make_tensor({n, n});
        out.beta = make_tensor({n});
        return out;
    }
    TensorPtr stacked = ctx.tape.stack_rows(ys);
    SelfAttnOut sa = self_attention(ctx, stacked, slot_mask, Level::list);
    const TensorPtr& values = config_.aggregate_refined_at_list_level ? sa.refined : stacked;
    AggregateOut agg = vanilla_aggregate(ctx, sa.refined, values, slot_mask, Level::list);
    out.x = ctx.drop(agg.vec);
    out.scores = sa.scores;
    out.beta = agg.weights;
    return out;
}

AttListModel::UserRepr AttListModel::user_repr(RunContext& ctx,
                                               const data::ProfileExample& ex) const {
    const int n = static_cast<int>(ex.profile_items.size());
    std::vector<ListRepr> lists;
    std::vector<TensorPtr> ys;
    lists.reserve(static_cast<size_t>(n));
    ys.reserve(static_cast<size_t>(n));
    for (int s = 0; s < n; ++s) {
        lists.push_back(list_repr(ctx, ex.profile_items[static_cast<size_t>(s)],
                                  ex.profile_item_mask[static_cast<size_t>(s)]));
        ys.push_back(lists.back().y);
    }
    UserRepr out = user_repr_from_ys(ctx, ys, ex.profile_slot_mask);
    out.lists = std::move(lists);
    return out;
}

AttListModel::PredictOut AttListModel::predict(RunContext& ctx, const TensorPtr& x_u,
                                               const TensorPtr& y_cand, int user,
                                               int list) const {
    PredictOut out;
    out.p = config_.use_id_embeddings
                ? ctx.tape.add(x_u, ctx.tape.gather_row(params_.user_emb, user))
                : x_u;
    out.q = config_.use_id_embeddings
                ? ctx.tape.add(y_cand, ctx.tape.gather_row(params_.list_emb, list))
                : y_cand;
    TensorPtr h0 = ctx.tape.concat({ctx.tape.mul(out.p, out.q), out.q, out.p});
    TensorPtr h1 = ctx.tape.relu(ctx.tape.add(ctx.tape.matvec(params_.W1, h0), params_.b1));
    h1 = ctx.drop(h1);
    out.r = ctx.tape.sigmoid(ctx.tape.add(ctx.tape.dot(params_.w2, h1), params_.b2));
    return out;
}

TensorPtr AttListModel::forward(RunContext& ctx, const data::ProfileExample& ex,
                                ForwardTrace* trace) const {
    UserRepr ur = user_repr(ctx, ex);
    ListRepr cand = list_repr(ctx, ex.cand_items, ex.cand_mask);
    PredictOut pred = predict(ctx, ur.x, cand.y, ex.user, ex.list);

    if (trace) {
        trace->user = ex.user;
        trace->list = ex.list;
        trace->m_items = static_cast<int>(ex.cand_items.size());
        trace->n_slots = static_cast<int>(ex.profile_items.size());
        trace->profile_lists = ex.profile_lists;
        trace->profile_item_ids.clear();
        trace->profile_scores.clear();
        trace->profile_alpha.clear();
        trace->profile_y.clear();
        for (size_t s = 0; s < ex.profile_lists.size(); ++s) {
            const ListRepr& lr = ur.lists[s];
            trace->profile_item_ids.push_back(ex.profile_items[s]);
            trace->profile_scores.push_back(lr.scores->values());
            trace->profile_alpha.push_back(lr.alpha->values());
            trace->profile_y.push_back(lr.y->values());
        }
        trace->cand_item_ids = ex.cand_items;
        trace->cand_scores = cand.scores->values();
        trace->cand_alpha = cand.alpha->values();
        trace->y_cand = cand.y->values();
        trace->list_scores = ur.scores->values();
        trace->beta = ur.beta->values();
        trace->x_u = ur.x->values();
        trace->p_u = pred.p->values();
        trace->q_l = pred.q->values();
        trace->r_hat = pred.r->item();
    }
    return pred.r;
}

void export_attention(const ForwardTrace& trace, std::ostream& out,
                      const data::InteractionDataset* ds) {
    json rec;
    rec["user"] = trace.user;
    rec["list"] = trace.list;
    rec["r_hat"] = trace.r_hat;
    if (ds) {
        rec["user_id"] = ds->user_ids[static_cast<size_t>(trace.user)];
        rec["list_id"] = ds->list_ids[static_cast<size_t>(trace.list)];
    }
    auto item_labels = [ds](const std::vector<int>& ids) {
        json out = json::array();
        for (int id : ids)
            if (ds)
                out.push_back(ds->item_ids[static_cast<size_t>(id)]);
            else
                out.push_back(id);
        return out;
    };
    rec["candidate"] = {{"items", item_labels(trace.cand_item_ids)},
                        {"scores", trace.cand_scores},
                        {"alpha", trace.cand_alpha}};
    json profile = json::array();
    for (size_t s = 0; s < trace.profile_lists.size(); ++s) {
        json p;
        p["list"] = trace.profile_lists[s];
        if (ds) p["list_id"] = ds->list_ids[static_cast<size_t>(trace.profile_lists[s])];
        p["items"] = item_labels(trace.profile_item_ids[s]);
        p["scores"] = trace.profile_scores[s];
        p["alpha"] = trace.profile_alpha[s];
        profile.push_back(std::move(p));
    }
    rec["profile"] = std::move(profile);
    rec["list_level"] = {{"scores", trace.list_scores}, {"beta", trace.beta}};
    out << rec.dump() << "\n";
    if (!out) throw IoError("attention export sink is not writable");
}

}  // namespace attlist::model
