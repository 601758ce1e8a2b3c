#include "attlist/trainer.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "attlist/errors.hpp"
#include "attlist/loss.hpp"
#include "attlist/negatives.hpp"
#include "attlist/profiles.hpp"
#include "attlist/ranker.hpp"
#include "attlist/rng.hpp"

namespace attlist::train {

using core::CounterRng;
using core::stream_id;
using core::Tape;
using core::TensorPtr;

void TrainConfig::validate() const {
    auto positive = [](const char* name, auto v) {
        if (v <= 0) throw ConfigError(std::string("config field ") + name + " must be positive");
    };
    positive("batch_size", batch_size);
    positive("learning_rate", learning_rate);
    positive("d", d);
    positive("D", D);
    positive("N", N);
    positive("M", M);
    positive("rho", rho);
    positive("max_epochs", max_epochs);
    positive("patience", patience);
    if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("config field gamma must be in [0,1)");
    if (lambda < 0.0) throw ConfigError("config field lambda must be >= 0");
    if (clip_threshold <= 0.0) throw ConfigError("config field clip_threshold must be positive");
}

namespace {

struct TrainExample {
    int user;
    int list;
    int label;
};

void clip_global_norm(const std::vector<TensorPtr>& params, double threshold) {
    double sq = 0.0;
    for (const auto& p : params)
        for (size_t i = 0; i < p->size(); ++i) sq += p->grad()[i] * p->grad()[i];
    const double norm = std::sqrt(sq);
    if (norm <= threshold) return;
    const double s = threshold / norm;
    for (const auto& p : params)
        for (size_t i = 0; i < p->size(); ++i) p->grad()[i] *= s;
}

}  // namespace

Checkpoint snapshot_attlist(const model::ParameterSet& params, const TrainConfig& config,
                            const data::InteractionDataset& ds, const core::AdamState& adam,
                            int epoch, double best_metric, int best_epoch) {
    Checkpoint ck;
    ck.model_kind = "attlist";
    ck.config = config;
    ck.num_users = ds.num_users;
    ck.num_lists = ds.num_lists;
    ck.num_items = ds.num_items;
    ck.epoch = epoch;
    ck.best_metric = best_metric;
    ck.best_epoch = best_epoch;
    for (const auto& np : params.named()) {
        core::NamedParam copy;
        copy.name = np.name;
        copy.tensor = core::make_tensor(np.tensor->shape(), np.tensor->values(),
                                        /*with_grad=*/true);
        ck.tensors.push_back(std::move(copy));
    }
    ck.adam = adam;
    return ck;
}

model::AttListModel model_from_checkpoint(const Checkpoint& ck) {
    if (ck.model_kind != "attlist")
        throw ConfigError("checkpoint holds model kind '" + ck.model_kind + "', not attlist");
    model::ModelDims dims;
    dims.num_items = ck.num_items;
    dims.num_users = ck.num_users;
    dims.num_lists = ck.num_lists;
    dims.d = ck.config.d;
    dims.D = ck.config.D;
    dims.M = ck.config.M;
    dims.linear_projections = ck.config.ablation.use_linear_projections;

    model::ParameterSet params = model::ParameterSet::init(dims, ck.config.seed);
    auto named = params.named();
    if (named.size() != ck.tensors.size())
        throw ConfigError("checkpoint tensor count mismatch");
    for (size_t i = 0; i < named.size(); ++i) {
        if (named[i].name != ck.tensors[i].name ||
            named[i].tensor->shape() != ck.tensors[i].tensor->shape())
            throw ConfigError("checkpoint tensor '" + ck.tensors[i].name +
                              "' does not match the configured model");
        named[i].tensor->values() = ck.tensors[i].tensor->values();
    }
    return model::AttListModel(std::move(params), ck.config.ablation);
}

TrainResult train_attlist(const data::InteractionDataset& ds, const TrainConfig& config,
                          std::ostream* progress, const Checkpoint* resume) {
    config.validate();

    model::ModelDims dims;
    dims.num_items = ds.num_items;
    dims.num_users = ds.num_users;
    dims.num_lists = ds.num_lists;
    dims.d = config.d;
    dims.D = config.D;
    dims.M = config.M;
    dims.linear_projections = config.ablation.use_linear_projections;

    model::ParameterSet params = model::ParameterSet::init(dims, config.seed);
    std::vector<TensorPtr> param_list = params.all();
    core::AdamState adam =
        core::AdamState::init(param_list, {config.learning_rate, 0.9, 0.999, 1e-8});

    int start_epoch = 1;
    EarlyStopping stopper(config.patience);
    Checkpoint best;
    bool have_best = false;

    if (resume) {
        auto named = params.named();
        if (named.size() != resume->tensors.size())
            throw ConfigError("resume checkpoint does not match the configured model");
        for (size_t i = 0; i < named.size(); ++i)
            named[i].tensor->values() = resume->tensors[i].tensor->values();
        adam = resume->adam;
        adam.hyper.learning_rate = config.learning_rate;
        start_epoch = resume->epoch + 1;
        stopper.restore(resume->best_metric, resume->epoch - resume->best_epoch);
        best = *resume;
        have_best = true;
    }

    model::AttListModel mdl(std::move(params), config.ablation);
    const model::ParameterSet& p = mdl.params();
    param_list = p.all();

    data::ProfileBuilder builder(ds, config.N, config.M);
    data::NegativeSampler sampler(ds);

    TrainResult result;
    for (int epoch = start_epoch; epoch <= config.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        // Fresh negatives each epoch, ratio rho per train positive.
        std::vector<TrainExample> examples;
        for (int u = 0; u < ds.num_users; ++u) {
            const auto& pos = sampler.train_positives(u);
            if (pos.empty()) continue;
            for (int l : pos) examples.push_back({u, l, 1});
            const auto negs =
                sampler.sample(u, config.rho, config.seed, static_cast<uint64_t>(epoch));
            if (negs.empty() && progress)
                *progress << "note: user " << u << " has no candidate negatives\n";
            for (int l : negs) examples.push_back({u, l, 0});
        }
        if (examples.empty()) throw ConfigError("no training examples (empty train split?)");

        CounterRng shuffle_rng(config.seed, stream_id(0x5348, static_cast<uint64_t>(epoch)));
        shuffle_rng.shuffle(examples);

        double bce_total = 0.0;
        const size_t total = examples.size();
        for (size_t off = 0; off < total; off += static_cast<size_t>(config.batch_size)) {
            const size_t end = std::min(total, off + static_cast<size_t>(config.batch_size));

            Tape tape(/*recording=*/true);
            std::vector<TensorPtr> preds;
            std::vector<int> labels;
            preds.reserve(end - off);
            labels.reserve(end - off);
            for (size_t i = off; i < end; ++i) {
                const TrainExample& e = examples[i];
                model::RunContext ctx{tape, /*training=*/true, config.gamma, config.seed,
                                      stream_id(0x6578, static_cast<uint64_t>(epoch), i)};
                const data::ProfileExample ex = builder.build(e.user, e.list, e.label);
                preds.push_back(mdl.forward(ctx, ex));
                labels.push_back(e.label);
            }
            TensorPtr bce = bce_loss(tape, preds, labels);
            TensorPtr loss =
                config.lambda > 0.0 ? tape.add(bce, l2_penalty(tape, p, config.lambda)) : bce;
            if (!std::isfinite(loss->item()))
                throw DivergenceError("training diverged: non-finite loss at epoch " +
                                      std::to_string(epoch) + ", batch " +
                                      std::to_string(off / config.batch_size));
            bce_total += bce->item();

            mdl.params().zero_grads();
            tape.backward(loss);
            mdl.params().freeze_padding_row();
            if (config.clip_gradients) clip_global_norm(param_list, config.clip_threshold);
            core::adam_step(param_list, adam);
        }

        const eval::AttListScorer scorer(mdl, ds, config.N, config.M);
        const eval::ValMetrics vm = eval::validate_scorer(scorer, ds);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = bce_total / static_cast<double>(total);
        rec.val_ndcg10 = vm.ndcg10;
        rec.val_p10 = vm.p10;
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(rec);
        result.epochs_run = epoch - start_epoch + 1;

        // The first epoch always improves on -inf, so a best snapshot exists
        // from epoch 1 onward.
        if (stopper.observe(vm.ndcg10) || !have_best) {
            best = snapshot_attlist(p, config, ds, adam, epoch, stopper.best(), epoch);
            have_best = true;
        }

        if (progress)
            *progress << "epoch " << epoch << "  loss/ex " << rec.train_loss << "  val N@10 "
                      << vm.ndcg10 << "  val P@10 " << vm.p10 << "  (" << rec.seconds << "s)\n";

        if (stopper.should_stop()) break;
    }

    result.last = snapshot_attlist(p, config, ds, adam, start_epoch + result.epochs_run - 1,
                                   stopper.best(), best.best_epoch);
    result.best = std::move(best);
    return result;
}

}  // namespace attlist::train
