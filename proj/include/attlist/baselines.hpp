#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "attlist/checkpoint.hpp"
#include "attlist/dataset.hpp"
#include "attlist/ranker.hpp"

namespace attlist::baselines {

// Train-split interaction counts per list.
struct PopularityTable {
    std::vector<int64_t> counts;
    static PopularityTable from(const data::InteractionDataset& ds);
};

// Recommends the same most-interacted lists to every user.
class ItemPopScorer : public eval::ListScorer {
public:
    explicit ItemPopScorer(const data::InteractionDataset& ds)
        : table_(PopularityTable::from(ds)) {}

    std::vector<double> score(int, const std::vector<int>& candidates) const override {
        std::vector<double> out;
        out.reserve(candidates.size());
        for (int l : candidates)
            out.push_back(static_cast<double>(table_.counts[static_cast<size_t>(l)]));
        return out;
    }

private:
    PopularityTable table_;
};

// Latent factors for MF and BPR; score(u,l) = <user row, list row>.
struct FactorModel {
    int d = 0;
    std::vector<double> user_factors;  // |U| x d
    std::vector<double> list_factors;  // |L| x d
};

class FactorScorer : public eval::ListScorer {
public:
    explicit FactorScorer(FactorModel m) : m_(std::move(m)) {}

    std::vector<double> score(int user, const std::vector<int>& candidates) const override;

private:
    FactorModel m_;
};

struct BaselineConfig {
    int d = 32;
    double learning_rate = 0.01;
    int rho = 3;          // MF negatives per positive
    double reg = 0.0;     // L2 on the factor rows touched by a step
    int batch_size = 256;
    int max_epochs = 200;
    int patience = 10;
    uint64_t seed = 42;
};

struct BaselineResult {
    FactorModel model;  // best-validation snapshot
    FactorModel last;   // end-of-training factors
    double best_metric = 0.0;
    int best_epoch = 0;
    int epochs_run = 0;
};

// Squared error against 1 on train positives and 0 on rho sampled negatives
// per positive; Adam; early stopping on validation NDCG@10.
BaselineResult mf_train(const data::InteractionDataset& ds, const BaselineConfig& config,
                        std::ostream* progress = nullptr);

// Pairwise ranking: per train positive sample one negative and minimize
// -ln sigmoid(x_pos - x_neg) with L2 on the touched rows; Adam; early
// stopping on validation NDCG@10.
BaselineResult bpr_train(const data::InteractionDataset& ds, const BaselineConfig& config,
                         std::ostream* progress = nullptr);

// Baseline checkpoints reuse the shared container with a model-kind tag.
train::Checkpoint baseline_checkpoint(const std::string& kind, const FactorModel& model,
                                      const BaselineConfig& config,
                                      const data::InteractionDataset& ds, double best_metric,
                                      int best_epoch);
FactorModel factor_model_from_checkpoint(const train::Checkpoint& ck);

}  // namespace attlist::baselines
