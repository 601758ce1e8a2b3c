#pragma once

// Straight-line reference of the full scoring pipeline, written directly
// from the model equations with plain loops over std::vector<double>. It
// shares no code with the tape-based implementation and exists purely as an
// independent oracle for the tests.

#include <cstdint>
#include <vector>

#include "attlist/ablation.hpp"
#include "attlist/model.hpp"
#include "attlist/params.hpp"
#include "attlist/profiles.hpp"

namespace refmodel {

struct RefParams {
    int num_items = 0, num_users = 0, num_lists = 0;
    int d = 0, D = 0, M = 0;

    std::vector<double> item_emb;  // (|T|+1) x d
    std::vector<double> pos_emb;   // M x d
    std::vector<double> Wi, bi, ui;  // d*d, d, d
    std::vector<double> Wl, bl, ul;
    std::vector<double> user_emb, list_emb;
    std::vector<double> W1, b1;  // D x 3d, D
    std::vector<double> w2;      // D
    double b2 = 0.0;
    std::vector<double> pq, pk, pv;  // item-level projections, d*d each
    std::vector<double> lq, lk, lv;  // list-level projections

    static RefParams from(const attlist::model::ParameterSet& p);
};

// Scores one example; dropout is assumed off.
double score(const RefParams& p, const attlist::model::AblationConfig& config,
             const attlist::data::ProfileExample& ex);

// Item-level pieces exposed for targeted checks.
std::vector<double> list_vector(const RefParams& p, const attlist::model::AblationConfig& config,
                                const std::vector<int>& items, const std::vector<uint8_t>& mask);

}  // namespace refmodel
