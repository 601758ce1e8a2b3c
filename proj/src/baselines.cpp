#include "attlist/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "attlist/adam.hpp"
#include "attlist/errors.hpp"
#include "attlist/negatives.hpp"
#include "attlist/rng.hpp"
#include "attlist/tape.hpp"

namespace attlist::baselines {

using core::CounterRng;
using core::make_scalar;
using core::make_tensor;
using core::stream_id;
using core::Tape;
using core::TensorPtr;

PopularityTable PopularityTable::from(const data::InteractionDataset& ds) {
    PopularityTable t;
    t.counts.assign(static_cast<size_t>(ds.num_lists), 0);
    for (const auto& it : ds.interactions)
        if (it.split == data::Split::train) t.counts[static_cast<size_t>(it.list)] += 1;
    return t;
}

std::vector<double> FactorScorer::score(int user, const std::vector<int>& candidates) const {
    std::vector<double> out;
    out.reserve(candidates.size());
    const double* pu = m_.user_factors.data() + static_cast<size_t>(user) * m_.d;
    for (int l : candidates) {
        const double* ql = m_.list_factors.data() + static_cast<size_t>(l) * m_.d;
        double acc = 0.0;
        for (int j = 0; j < m_.d; ++j) acc += pu[j] * ql[j];
        out.push_back(acc);
    }
    return out;
}

namespace {

struct Factors {
    TensorPtr users;
    TensorPtr lists;
};

Factors init_factors(const data::InteractionDataset& ds, int d, uint64_t seed) {
    Factors f;
    f.users = make_tensor({ds.num_users, d}, /*with_grad=*/true);
    f.lists = make_tensor({ds.num_lists, d}, /*with_grad=*/true);
    CounterRng ru(seed, stream_id(0x6d66, 0));
    for (size_t i = 0; i < f.users->size(); ++i) f.users->data()[i] = ru.next_uniform(-0.05, 0.05);
    CounterRng rl(seed, stream_id(0x6d66, 1));
    for (size_t i = 0; i < f.lists->size(); ++i) f.lists->data()[i] = rl.next_uniform(-0.05, 0.05);
    return f;
}

FactorModel to_model(const Factors& f, int d) {
    FactorModel m;
    m.d = d;
    m.user_factors = f.users->values();
    m.list_factors = f.lists->values();
    return m;
}

struct Pair {
    int user;
    int list;
    int label;
};

template <typename EpochFn>
BaselineResult run_baseline(const data::InteractionDataset& ds, const BaselineConfig& config,
                            std::ostream* progress, const char* kind, EpochFn run_epoch) {
    Factors f = init_factors(ds, config.d, config.seed);
    std::vector<TensorPtr> params = {f.users, f.lists};
    core::AdamState adam = core::AdamState::init(params, {config.learning_rate, 0.9, 0.999, 1e-8});

    BaselineResult result;
    result.model = to_model(f, config.d);

    train::EarlyStopping stopper(config.patience);
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double loss = run_epoch(epoch, f, params, adam);
        if (!std::isfinite(loss))
            throw DivergenceError(std::string(kind) + " training diverged at epoch " +
                                  std::to_string(epoch));

        const FactorScorer scorer(to_model(f, config.d));
        const eval::ValMetrics vm = eval::validate_scorer(scorer, ds);
        if (progress)
            *progress << kind << " epoch " << epoch << "  loss " << loss << "  val N@10 "
                      << vm.ndcg10 << "\n";

        result.epochs_run = epoch;
        if (stopper.observe(vm.ndcg10)) {
            result.model = to_model(f, config.d);
            result.best_metric = vm.ndcg10;
            result.best_epoch = epoch;
        }
        if (stopper.should_stop()) break;
    }
    result.last = to_model(f, config.d);
    return result;
}

}  // namespace

BaselineResult mf_train(const data::InteractionDataset& ds, const BaselineConfig& config,
                        std::ostream* progress) {
    data::NegativeSampler sampler(ds);
    return run_baseline(
        ds, config, progress, "mf",
        [&](int epoch, Factors& f, std::vector<TensorPtr>& params, core::AdamState& adam) {
            std::vector<Pair> examples;
            for (int u = 0; u < ds.num_users; ++u) {
                for (int l : sampler.train_positives(u)) examples.push_back({u, l, 1});
                for (int l :
                     sampler.sample(u, config.rho, config.seed, static_cast<uint64_t>(epoch)))
                    examples.push_back({u, l, 0});
            }
            CounterRng rng(config.seed, stream_id(0x6d73, static_cast<uint64_t>(epoch)));
            rng.shuffle(examples);

            double total = 0.0;
            for (size_t off = 0; off < examples.size();
                 off += static_cast<size_t>(config.batch_size)) {
                const size_t end =
                    std::min(examples.size(), off + static_cast<size_t>(config.batch_size));
                Tape tape;
                std::vector<TensorPtr> diffs;
                diffs.reserve(end - off);
                for (size_t i = off; i < end; ++i) {
                    const Pair& e = examples[i];
                    TensorPtr pred = tape.dot(tape.gather_row(f.users, e.user),
                                              tape.gather_row(f.lists, e.list));
                    TensorPtr target = make_scalar(-static_cast<double>(e.label));
                    diffs.push_back(tape.add(pred, target));
                }
                TensorPtr loss = tape.sumsq(tape.concat(diffs));
                total += loss->item();
                f.users->zero_grad();
                f.lists->zero_grad();
                tape.backward(loss);
                core::adam_step(params, adam);
            }
            return total / static_cast<double>(std::max<size_t>(1, examples.size()));
        });
}

BaselineResult bpr_train(const data::InteractionDataset& ds, const BaselineConfig& config,
                         std::ostream* progress) {
    data::NegativeSampler sampler(ds);
    return run_baseline(
        ds, config, progress, "bpr",
        [&](int epoch, Factors& f, std::vector<TensorPtr>& params, core::AdamState& adam) {
            std::vector<Pair> positives;
            for (int u = 0; u < ds.num_users; ++u)
                for (int l : sampler.train_positives(u)) positives.push_back({u, l, 1});
            CounterRng rng(config.seed, stream_id(0x6270, static_cast<uint64_t>(epoch)));
            rng.shuffle(positives);

            double total = 0.0;
            size_t triples = 0;
            for (size_t off = 0; off < positives.size();
                 off += static_cast<size_t>(config.batch_size)) {
                const size_t end =
                    std::min(positives.size(), off + static_cast<size_t>(config.batch_size));
                Tape tape;
                std::vector<TensorPtr> preds;
                std::vector<int> labels;
                std::vector<TensorPtr> reg_terms;
                for (size_t i = off; i < end; ++i) {
                    const Pair& e = positives[i];
                    const auto& pos = sampler.all_positives(e.user);
                    if (pos.size() >= static_cast<size_t>(ds.num_lists)) continue;
                    CounterRng nrng(config.seed,
                                    stream_id(0x627a, static_cast<uint64_t>(epoch), i));
                    int neg = -1;
                    do {
                        neg = static_cast<int>(
                            nrng.next_below(static_cast<uint64_t>(ds.num_lists)));
                    } while (std::binary_search(pos.begin(), pos.end(), neg));

                    TensorPtr pu = tape.gather_row(f.users, e.user);
                    TensorPtr qp = tape.gather_row(f.lists, e.list);
                    TensorPtr qn = tape.gather_row(f.lists, neg);
                    TensorPtr diff =
                        tape.add(tape.dot(pu, qp), tape.scale(tape.dot(pu, qn), -1.0));
                    preds.push_back(tape.sigmoid(diff));
                    labels.push_back(1);
                    if (config.reg > 0.0)
                        reg_terms.push_back(tape.add(
                            tape.sumsq(pu), tape.add(tape.sumsq(qp), tape.sumsq(qn))));
                    ++triples;
                }
                if (preds.empty()) continue;
                TensorPtr loss = tape.bce_sum(tape.concat(preds), labels);
                if (!reg_terms.empty())
                    loss = tape.add(loss, tape.scale(tape.sum(tape.concat(reg_terms)), config.reg));
                total += loss->item();
                f.users->zero_grad();
                f.lists->zero_grad();
                tape.backward(loss);
                core::adam_step(params, adam);
            }
            return total / static_cast<double>(std::max<size_t>(1, triples));
        });
}

train::Checkpoint baseline_checkpoint(const std::string& kind, const FactorModel& model,
                                      const BaselineConfig& config,
                                      const data::InteractionDataset& ds, double best_metric,
                                      int best_epoch) {
    train::Checkpoint ck;
    ck.model_kind = kind;
    ck.config.d = config.d;
    ck.config.learning_rate = config.learning_rate;
    ck.config.rho = config.rho;
    ck.config.batch_size = config.batch_size;
    ck.config.patience = config.patience;
    ck.config.max_epochs = config.max_epochs;
    ck.config.seed = config.seed;
    ck.num_users = ds.num_users;
    ck.num_lists = ds.num_lists;
    ck.num_items = ds.num_items;
    ck.epoch = best_epoch;
    ck.best_metric = best_metric;
    ck.best_epoch = best_epoch;

    core::NamedParam uf;
    uf.name = "user_factors";
    uf.tensor = make_tensor({ds.num_users, config.d}, model.user_factors);
    core::NamedParam lf;
    lf.name = "list_factors";
    lf.tensor = make_tensor({ds.num_lists, config.d}, model.list_factors);
    ck.tensors.push_back(std::move(uf));
    ck.tensors.push_back(std::move(lf));
    ck.adam = core::AdamState::init({ck.tensors[0].tensor, ck.tensors[1].tensor},
                                    {config.learning_rate, 0.9, 0.999, 1e-8});
    return ck;
}

FactorModel factor_model_from_checkpoint(const train::Checkpoint& ck) {
    if (ck.model_kind != "mf" && ck.model_kind != "bpr")
        throw ConfigError("checkpoint holds model kind '" + ck.model_kind + "', not a factor model");
    FactorModel m;
    m.d = ck.config.d;
    m.user_factors = ck.tensors.at(0).tensor->values();
    m.list_factors = ck.tensors.at(1).tensor->values();
    return m;
}

}  // namespace attlist::baselines
