#include "attlist/params.hpp"

#include <cmath>

#include "attlist/errors.hpp"
#include "attlist/rng.hpp"

namespace attlist::model {

using core::CounterRng;
using core::make_tensor;
using core::NamedParam;
using core::stream_id;
using core::TensorPtr;

namespace {

TensorPtr uniform_tensor(std::vector<int> shape, double lo, double hi, uint64_t seed,
                         uint64_t stream) {
    TensorPtr t = make_tensor(std::move(shape), /*with_grad=*/true);
    CounterRng rng(seed, stream);
    for (size_t i = 0; i < t->size(); ++i) t->data()[i] = rng.next_uniform(lo, hi);
    return t;
}

// Glorot-style scaled uniform for weight matrices.
TensorPtr glorot_tensor(int rows, int cols, uint64_t seed, uint64_t stream) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    return uniform_tensor({rows, cols}, -bound, bound, seed, stream);
}

constexpr double kEmbedBound = 0.05;

}  // namespace

ParameterSet ParameterSet::init(const ModelDims& dims, uint64_t seed) {
    if (dims.num_items < 0 || dims.num_users <= 0 || dims.num_lists <= 0 || dims.d <= 0 ||
        dims.D <= 0 || dims.M <= 0)
        throw ConfigError("invalid model dimensions");

    ParameterSet p;
    p.dims = dims;
    const int d = dims.d;

    uint64_t s = 0;
    auto next = [&s] { return stream_id(0x7072, s++); };

    p.item_emb = uniform_tensor({dims.num_items + 1, d}, -kEmbedBound, kEmbedBound, seed, next());
    for (int j = 0; j < d; ++j) p.item_emb->at(0, j) = 0.0;  // padding row

    p.pos_emb = uniform_tensor({dims.M, d}, -kEmbedBound, kEmbedBound, seed, next());

    p.attn_item_W = glorot_tensor(d, d, seed, next());
    p.attn_item_b = make_tensor({d}, /*with_grad=*/true);
    p.attn_item_u = uniform_tensor({d}, -kEmbedBound, kEmbedBound, seed, next());
    p.attn_list_W = glorot_tensor(d, d, seed, next());
    p.attn_list_b = make_tensor({d}, /*with_grad=*/true);
    p.attn_list_u = uniform_tensor({d}, -kEmbedBound, kEmbedBound, seed, next());

    p.user_emb = uniform_tensor({dims.num_users, d}, -kEmbedBound, kEmbedBound, seed, next());
    p.list_emb = uniform_tensor({dims.num_lists, d}, -kEmbedBound, kEmbedBound, seed, next());

    p.W1 = glorot_tensor(dims.D, 3 * d, seed, next());
    p.b1 = make_tensor({dims.D}, /*with_grad=*/true);
    p.w2 = uniform_tensor({dims.D}, -kEmbedBound, kEmbedBound, seed, next());
    p.b2 = make_tensor({1}, /*with_grad=*/true);

    if (dims.linear_projections) {
        p.proj_item_q = glorot_tensor(d, d, seed, next());
        p.proj_item_k = glorot_tensor(d, d, seed, next());
        p.proj_item_v = glorot_tensor(d, d, seed, next());
        p.proj_list_q = glorot_tensor(d, d, seed, next());
        p.proj_list_k = glorot_tensor(d, d, seed, next());
        p.proj_list_v = glorot_tensor(d, d, seed, next());
    }
    return p;
}

std::vector<TensorPtr> ParameterSet::all() const {
    std::vector<TensorPtr> v = {item_emb,     pos_emb,     attn_item_W, attn_item_b,
                                attn_item_u,  attn_list_W, attn_list_b, attn_list_u,
                                user_emb,     list_emb,    W1,          b1,
                                w2,           b2};
    if (dims.linear_projections) {
        v.push_back(proj_item_q);
        v.push_back(proj_item_k);
        v.push_back(proj_item_v);
        v.push_back(proj_list_q);
        v.push_back(proj_list_k);
        v.push_back(proj_list_v);
    }
    return v;
}

std::vector<NamedParam> ParameterSet::named() const {
    std::vector<NamedParam> v = {
        {"item_emb", item_emb},       {"pos_emb", pos_emb},
        {"attn_item_W", attn_item_W}, {"attn_item_b", attn_item_b},
        {"attn_item_u", attn_item_u}, {"attn_list_W", attn_list_W},
        {"attn_list_b", attn_list_b}, {"attn_list_u", attn_list_u},
        {"user_emb", user_emb},       {"list_emb", list_emb},
        {"W1", W1},                   {"b1", b1},
        {"w2", w2},                   {"b2", b2}};
    if (dims.linear_projections) {
        v.push_back({"proj_item_q", proj_item_q});
        v.push_back({"proj_item_k", proj_item_k});
        v.push_back({"proj_item_v", proj_item_v});
        v.push_back({"proj_list_q", proj_list_q});
        v.push_back({"proj_list_k", proj_list_k});
        v.push_back({"proj_list_v", proj_list_v});
    }
    return v;
}

void ParameterSet::zero_grads() {
    for (const auto& t : all()) t->zero_grad();
}

void ParameterSet::freeze_padding_row() {
    double* g = item_emb->grad();
    for (int j = 0; j < dims.d; ++j) g[j] = 0.0;
}

}  // namespace attlist::model
