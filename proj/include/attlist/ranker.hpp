#pragma once

#include <memory>
#include <vector>

#include "attlist/dataset.hpp"
#include "attlist/metrics.hpp"
#include "attlist/model.hpp"
#include "attlist/profiles.hpp"

namespace attlist::eval {

// Uniform scoring interface over trained models and baselines. Implementations
// must be pure and safe to call concurrently for different users.
class ListScorer {
public:
    virtual ~ListScorer() = default;
    virtual std::vector<double> score(int user, const std::vector<int>& candidates) const = 0;
};

// Scores candidates with a trained AttList. List representations depend only
// on the list contents, so they are computed once for all lists up front;
// per call only the user representation and the prediction head run.
class AttListScorer : public ListScorer {
public:
    AttListScorer(const model::AttListModel& model, const data::InteractionDataset& ds,
                  int n_slots, int m_items);

    std::vector<double> score(int user, const std::vector<int>& candidates) const override;

private:
    const model::AttListModel& model_;
    data::ProfileBuilder builder_;
    std::vector<std::vector<double>> list_y_;  // per list, d values
};

struct RankedCandidates {
    int user = 0;
    std::vector<int> lists;       // descending score, ties by ascending index
    std::vector<double> scores;   // aligned with lists
    std::vector<int> truth;       // sorted ascending
};

// Candidate set is every list minus `exclude` (sorted); ordering is
// deterministic: descending score, ties broken by ascending list index.
RankedCandidates rank_for_user(const ListScorer& scorer, const data::InteractionDataset& ds,
                               int user, const std::vector<int>& exclude,
                               std::vector<int> truth);

struct EvalTask {
    data::Split truth_split = data::Split::test;
    bool exclude_train = true;       // candidate policy: exclude seen
    bool exclude_validation = true;
    bool include_zero_truth_users = true;
};

// Mean metrics over users (zero-truth users score 0 when included). The
// per-user loop is parallel; aggregation is a deterministic fold.
MetricsReport evaluate(const ListScorer& scorer, const data::InteractionDataset& ds,
                       const EvalTask& task, uint64_t config_hash = 0);

struct ValMetrics {
    double ndcg10 = 0.0;
    double p10 = 0.0;
};

// Validation-split metrics over users with validation truth, candidates
// excluding only the user's train positives.
ValMetrics validate_scorer(const ListScorer& scorer, const data::InteractionDataset& ds);

}  // namespace attlist::eval
