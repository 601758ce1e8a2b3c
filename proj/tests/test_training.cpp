#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "attlist/errors.hpp"
#include "attlist/loss.hpp"
#include "attlist/synthetic.hpp"
#include "attlist/trainer.hpp"

using namespace attlist;
using core::make_scalar;
using core::make_tensor;
using core::Tape;
using train::TrainConfig;

namespace {

data::InteractionDataset tiny_train_ds(uint64_t seed = 5) {
    data::SyntheticSpec spec;
    spec.users = 12;
    spec.lists = 15;
    spec.items = 30;
    spec.topics = 3;
    spec.noise = 0.1;
    spec.seed = seed;
    auto ds = data::generate_synthetic(spec);
    data::split_dataset(ds, {}, seed);
    return ds;
}

TrainConfig tiny_config() {
    TrainConfig c;
    c.d = 4;
    c.D = 5;
    c.N = 3;
    c.M = 4;
    c.rho = 1;
    c.gamma = 0.0;
    c.lambda = 0.0;
    c.batch_size = 8;
    c.learning_rate = 0.01;
    c.max_epochs = 2;
    c.patience = 10;
    c.seed = 77;
    return c;
}

}  // namespace

TEST_CASE("bce_loss examples") {
    Tape tape;
    auto half = make_scalar(0.5);
    CHECK(train::bce_loss(tape, {half}, {1})->item() ==
          doctest::Approx(0.6931).epsilon(1e-4));

    auto sure = make_scalar(0.999999999999);
    CHECK(train::bce_loss(tape, {sure}, {1})->item() == doctest::Approx(0.0).epsilon(1e-9));

    // Symmetric pair contributes equally.
    auto p = make_scalar(0.3);
    auto q = make_scalar(0.7);
    const double a = train::bce_loss(tape, {p}, {1})->item();
    const double b = train::bce_loss(tape, {q}, {0})->item();
    CHECK(a == doctest::Approx(b).epsilon(1e-12));

    CHECK_THROWS_AS(static_cast<void>(train::bce_loss(tape, {p}, {1, 0})), ValidationError);
}

TEST_CASE("l2_penalty examples") {
    model::ModelDims dims;
    dims.num_items = 3;
    dims.num_users = 2;
    dims.num_lists = 2;
    dims.d = 2;
    dims.D = 2;
    dims.M = 2;
    model::ParameterSet params = model::ParameterSet::init(dims, 1);

    Tape tape;
    CHECK(train::l2_penalty(tape, params, 0.0)->item() == 0.0);

    std::fill(params.attn_item_W->values().begin(), params.attn_item_W->values().end(), 0.0);
    std::fill(params.attn_list_W->values().begin(), params.attn_list_W->values().end(), 0.0);
    CHECK(train::l2_penalty(tape, params, 0.01)->item() == 0.0);

    std::fill(params.attn_item_W->values().begin(), params.attn_item_W->values().end(), 1.0);
    CHECK(train::l2_penalty(tape, params, 0.01)->item() == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("early stopping arithmetic") {
    train::EarlyStopping stop(10);
    CHECK(stop.observe(1.0));  // epoch 1 sets the best
    int epoch = 1;
    while (!stop.should_stop()) {
        ++epoch;
        CHECK_FALSE(stop.observe(1.0 - 0.01 * epoch));  // strictly decreasing
    }
    CHECK(epoch == 11);
    CHECK(stop.best() == 1.0);
}

TEST_CASE("training is deterministic") {
    const auto ds = tiny_train_ds();
    TrainConfig cfg = tiny_config();
    cfg.max_epochs = 1;
    const auto a = train::train_attlist(ds, cfg);
    const auto b = train::train_attlist(ds, cfg);
    REQUIRE(a.log.size() == 1);
    CHECK(a.log[0].train_loss == b.log[0].train_loss);
    CHECK(a.log[0].val_ndcg10 == b.log[0].val_ndcg10);
}

TEST_CASE("one small step decreases a single example's loss") {
    const auto ds = tiny_train_ds(9);
    TrainConfig cfg = tiny_config();
    cfg.learning_rate = 1e-4;
    cfg.batch_size = 1;
    cfg.max_epochs = 1;

    // Build the model by hand to measure one step on one example.
    model::ModelDims dims;
    dims.num_items = ds.num_items;
    dims.num_users = ds.num_users;
    dims.num_lists = ds.num_lists;
    dims.d = cfg.d;
    dims.D = cfg.D;
    dims.M = cfg.M;
    for (uint64_t trial = 0; trial < 5; ++trial) {
        model::ParameterSet params = model::ParameterSet::init(dims, 2000 + trial);
        model::AttListModel mdl(params, cfg.ablation);
        data::ProfileBuilder builder(ds, cfg.N, cfg.M);
        const int user = static_cast<int>(trial) % ds.num_users;
        const data::ProfileExample ex = builder.build(user, 0, 1);

        auto loss_value = [&] {
            Tape t(/*recording=*/false);
            model::RunContext ctx{t};
            return t.bce_sum(mdl.forward(ctx, ex), {1})->item();
        };
        const double before = loss_value();

        std::vector<core::TensorPtr> param_list = mdl.params().all();
        core::AdamState adam = core::AdamState::init(param_list, {cfg.learning_rate});
        Tape t;
        model::RunContext ctx{t};
        auto loss = t.bce_sum(mdl.forward(ctx, ex), {1});
        mdl.params().zero_grads();
        t.backward(loss);
        mdl.params().freeze_padding_row();
        core::adam_step(param_list, adam);

        CHECK(loss_value() < before);
    }
}

TEST_CASE("padding embedding row stays zero through training") {
    const auto ds = tiny_train_ds(13);
    TrainConfig cfg = tiny_config();
    cfg.max_epochs = 3;
    const auto result = train::train_attlist(ds, cfg);
    const auto& tensors = result.best.tensors;
    REQUIRE(tensors[0].name == "item_emb");
    for (int c = 0; c < cfg.d; ++c) CHECK(tensors[0].tensor->at(0, c) == 0.0);
}

TEST_CASE("best checkpoint dominates the validation log") {
    const auto ds = tiny_train_ds(17);
    TrainConfig cfg = tiny_config();
    cfg.max_epochs = 6;
    const auto result = train::train_attlist(ds, cfg);
    for (const auto& rec : result.log) CHECK(result.best.best_metric >= rec.val_ndcg10);
}

TEST_CASE("checkpoint save/load round trip and resume trajectory") {
    namespace fs = std::filesystem;
    const auto ds = tiny_train_ds(21);
    TrainConfig cfg = tiny_config();
    cfg.max_epochs = 2;
    cfg.patience = 100;

    const auto first = train::train_attlist(ds, cfg);
    const fs::path path = fs::temp_directory_path() / "attlist-ckpt-test.bin";
    first.best.save(path.string());
    const auto loaded = train::Checkpoint::load(path.string());
    fs::remove(path);

    CHECK(loaded.model_kind == "attlist");
    CHECK(loaded.config == first.best.config);
    CHECK(loaded.epoch == first.best.epoch);
    CHECK(loaded.config_hash() == first.best.config_hash());
    REQUIRE(loaded.tensors.size() == first.best.tensors.size());
    for (size_t i = 0; i < loaded.tensors.size(); ++i) {
        CHECK(loaded.tensors[i].name == first.best.tensors[i].name);
        CHECK(loaded.tensors[i].tensor->values() == first.best.tensors[i].tensor->values());
        CHECK(loaded.adam.m[i] == first.best.adam.m[i]);
        CHECK(loaded.adam.v[i] == first.best.adam.v[i]);
    }

    // Uninterrupted 4 epochs vs 2 epochs + resume of 2: same loss trajectory.
    TrainConfig cfg4 = cfg;
    cfg4.max_epochs = 4;
    const auto full_run = train::train_attlist(ds, cfg4);

    // Resume needs the snapshot of epoch 2 (the last), so retrain with the
    // metric forced monotone by patience; take the best-at-last checkpoint.
    const auto resumed = train::train_attlist(ds, cfg4, nullptr, &loaded);
    REQUIRE(full_run.log.size() == 4);
    const size_t base = full_run.log.size() - resumed.log.size();
    for (size_t i = 0; i < resumed.log.size(); ++i) {
        CHECK(resumed.log[i].epoch == full_run.log[base + i].epoch);
        CHECK(resumed.log[i].train_loss ==
              doctest::Approx(full_run.log[base + i].train_loss).epsilon(1e-12));
    }

    // Loading a missing file reports an I/O error.
    CHECK_THROWS_AS(train::Checkpoint::load(path.string()), IoError);
}

TEST_CASE("divergence aborts with a diagnostic naming the batch") {
    // NaN injection: poison a parameter tensor in a checkpoint, resume.
    const auto ds = tiny_train_ds(23);
    TrainConfig cfg = tiny_config();
    cfg.max_epochs = 1;
    auto result = train::train_attlist(ds, cfg);

    train::Checkpoint poisoned = result.last;
    for (auto& np : poisoned.tensors)
        if (np.name == "W1")
            for (size_t i = 0; i < np.tensor->size(); ++i)
                np.tensor->data()[i] = std::numeric_limits<double>::quiet_NaN();

    TrainConfig more = cfg;
    more.max_epochs = 3;
    CHECK_THROWS_WITH_AS(train::train_attlist(ds, more, nullptr, &poisoned),
                         doctest::Contains("batch"), DivergenceError);
}

TEST_CASE("training log loss decreases on an easy dataset") {
    const auto ds = tiny_train_ds(29);
    TrainConfig cfg = tiny_config();
    cfg.max_epochs = 15;
    cfg.patience = 50;
    const auto result = train::train_attlist(ds, cfg);
    CHECK(result.log.back().train_loss < result.log.front().train_loss);
}
