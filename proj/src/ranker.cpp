#include "attlist/ranker.hpp"

#include <algorithm>
#include <numeric>

#include "attlist/errors.hpp"
#include "attlist/tape.hpp"

namespace attlist::eval {

using core::make_tensor;
using core::Tape;
using core::TensorPtr;

AttListScorer::AttListScorer(const model::AttListModel& model,
                             const data::InteractionDataset& ds, int n_slots, int m_items)
    : model_(model), builder_(ds, n_slots, m_items) {
    list_y_.resize(static_cast<size_t>(ds.num_lists));
#pragma omp parallel for schedule(dynamic, 64)
    for (int l = 0; l < ds.num_lists; ++l) {
        Tape tape(/*recording=*/false);
        model::RunContext ctx{tape};
        std::vector<int> items;
        std::vector<uint8_t> mask;
        builder_.padded_list(l, items, mask);
        list_y_[static_cast<size_t>(l)] = model_.list_repr(ctx, items, mask).y->values();
    }
}

std::vector<double> AttListScorer::score(int user, const std::vector<int>& candidates) const {
    Tape tape(/*recording=*/false);
    model::RunContext ctx{tape};

    const data::ProfileExample ex = builder_.build(user, /*list=*/0, /*label=*/0);
    std::vector<TensorPtr> ys;
    ys.reserve(ex.profile_items.size());
    for (size_t s = 0; s < ex.profile_items.size(); ++s) {
        TensorPtr y = make_tensor({model_.params().dims.d});
        if (s < ex.profile_lists.size())
            y->values() = list_y_[static_cast<size_t>(ex.profile_lists[s])];
        ys.push_back(std::move(y));
    }
    const auto ur = model_.user_repr_from_ys(ctx, ys, ex.profile_slot_mask);

    std::vector<double> out;
    out.reserve(candidates.size());
    for (int l : candidates) {
        TensorPtr y = make_tensor({model_.params().dims.d});
        y->values() = list_y_[static_cast<size_t>(l)];
        out.push_back(model_.predict(ctx, ur.x, y, user, l).r->item());
    }
    return out;
}

RankedCandidates rank_for_user(const ListScorer& scorer, const data::InteractionDataset& ds,
                               int user, const std::vector<int>& exclude,
                               std::vector<int> truth) {
    RankedCandidates rc;
    rc.user = user;
    std::sort(truth.begin(), truth.end());
    rc.truth = std::move(truth);

    std::vector<int> candidates;
    candidates.reserve(static_cast<size_t>(ds.num_lists));
    for (int l = 0; l < ds.num_lists; ++l)
        if (!std::binary_search(exclude.begin(), exclude.end(), l)) candidates.push_back(l);

    std::vector<double> scores = scorer.score(user, candidates);
    if (scores.size() != candidates.size())
        throw DimensionError("scorer returned " + std::to_string(scores.size()) +
                             " scores for " + std::to_string(candidates.size()) + " candidates");

    std::vector<size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return candidates[a] < candidates[b];
    });

    rc.lists.reserve(order.size());
    rc.scores.reserve(order.size());
    for (size_t i : order) {
        rc.lists.push_back(candidates[i]);
        rc.scores.push_back(scores[i]);
    }
    return rc;
}

namespace {

struct UserSets {
    std::vector<std::vector<int>> train, val, test;
};

UserSets collect_user_sets(const data::InteractionDataset& ds) {
    UserSets s;
    s.train.resize(static_cast<size_t>(ds.num_users));
    s.val.resize(static_cast<size_t>(ds.num_users));
    s.test.resize(static_cast<size_t>(ds.num_users));
    for (const auto& it : ds.interactions) {
        auto& bucket = it.split == data::Split::train ? s.train
                       : it.split == data::Split::validation ? s.val
                                                             : s.test;
        bucket[static_cast<size_t>(it.user)].push_back(it.list);
    }
    return s;
}

struct PerUserMetrics {
    double p5 = 0, r5 = 0, n5 = 0, p10 = 0, r10 = 0, n10 = 0;
};

PerUserMetrics score_one_user(const ListScorer& scorer, const data::InteractionDataset& ds,
                              int user, const std::vector<int>& exclude,
                              const std::vector<int>& truth) {
    const RankedCandidates rc = rank_for_user(scorer, ds, user, exclude, truth);
    PerUserMetrics m;
    auto [p5, r5] = precision_recall_at_k(rc.lists, rc.truth, 5);
    auto [p10, r10] = precision_recall_at_k(rc.lists, rc.truth, 10);
    m.p5 = p5;
    m.r5 = r5;
    m.p10 = p10;
    m.r10 = r10;
    m.n5 = ndcg_at_k(rc.lists, rc.truth, 5);
    m.n10 = ndcg_at_k(rc.lists, rc.truth, 10);
    return m;
}

}  // namespace

MetricsReport evaluate(const ListScorer& scorer, const data::InteractionDataset& ds,
                       const EvalTask& task, uint64_t config_hash) {
    const UserSets sets = collect_user_sets(ds);

    std::vector<PerUserMetrics> per_user(static_cast<size_t>(ds.num_users));
    std::vector<uint8_t> counted(static_cast<size_t>(ds.num_users), 0);

#pragma omp parallel for schedule(dynamic, 8)
    for (int u = 0; u < ds.num_users; ++u) {
        const auto& truth = task.truth_split == data::Split::test ? sets.test[static_cast<size_t>(u)]
                            : task.truth_split == data::Split::validation
                                ? sets.val[static_cast<size_t>(u)]
                                : sets.train[static_cast<size_t>(u)];
        if (truth.empty() && !task.include_zero_truth_users) continue;
        counted[static_cast<size_t>(u)] = 1;
        if (truth.empty()) continue;  // contributes zeros

        std::vector<int> exclude;
        if (task.exclude_train)
            exclude.insert(exclude.end(), sets.train[static_cast<size_t>(u)].begin(),
                           sets.train[static_cast<size_t>(u)].end());
        if (task.exclude_validation && task.truth_split != data::Split::validation)
            exclude.insert(exclude.end(), sets.val[static_cast<size_t>(u)].begin(),
                           sets.val[static_cast<size_t>(u)].end());
        std::sort(exclude.begin(), exclude.end());

        per_user[static_cast<size_t>(u)] = score_one_user(scorer, ds, u, exclude, truth);
    }

    MetricsReport report;
    report.config_hash = config_hash;
    for (int u = 0; u < ds.num_users; ++u) {
        if (!counted[static_cast<size_t>(u)]) continue;
        const PerUserMetrics& m = per_user[static_cast<size_t>(u)];
        report.user_count += 1;
        report.p5 += m.p5;
        report.r5 += m.r5;
        report.n5 += m.n5;
        report.p10 += m.p10;
        report.r10 += m.r10;
        report.n10 += m.n10;
    }
    if (report.user_count > 0) {
        const double scale = 100.0 / report.user_count;
        report.p5 *= scale;
        report.r5 *= scale;
        report.n5 *= scale;
        report.p10 *= scale;
        report.r10 *= scale;
        report.n10 *= scale;
    }
    return report;
}

ValMetrics validate_scorer(const ListScorer& scorer, const data::InteractionDataset& ds) {
    EvalTask task;
    task.truth_split = data::Split::validation;
    task.exclude_train = true;
    task.exclude_validation = false;
    task.include_zero_truth_users = false;
    const MetricsReport r = evaluate(scorer, ds, task);
    return {r.n10 / 100.0, r.p10 / 100.0};
}

}  // namespace attlist::eval
