#pragma once

#include <iosfwd>
#include <vector>

#include "attlist/checkpoint.hpp"
#include "attlist/dataset.hpp"
#include "attlist/model.hpp"
#include "attlist/train_config.hpp"

namespace attlist::train {

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;  // mean BCE per example (the optimized loss is the sum)
    double val_ndcg10 = 0.0;
    double val_p10 = 0.0;
    double seconds = 0.0;
};

struct TrainResult {
    Checkpoint best;  // snapshot of the best-validation epoch
    Checkpoint last;  // snapshot of the final epoch
    std::vector<EpochRecord> log;
    int epochs_run = 0;
};

// Full training loop: per epoch, fresh negatives at ratio rho, shuffled
// minibatches, Adam updates, then validation NDCG@10 for early stopping.
// Stops after `patience` epochs without improvement or at max_epochs,
// returning the best checkpoint. Aborts with DivergenceError when a batch
// loss stops being finite. Deterministic under (config.seed, dataset).
TrainResult train_attlist(const data::InteractionDataset& ds, const TrainConfig& config,
                          std::ostream* progress = nullptr,
                          const Checkpoint* resume = nullptr);

// Rebuilds the model held by a checkpoint (parameter tensors are shared with
// the checkpoint, not copied).
model::AttListModel model_from_checkpoint(const Checkpoint& ck);

// Deep-copies current parameters into a checkpoint snapshot.
Checkpoint snapshot_attlist(const model::ParameterSet& params, const TrainConfig& config,
                            const data::InteractionDataset& ds, const core::AdamState& adam,
                            int epoch, double best_metric, int best_epoch);

}  // namespace attlist::train
