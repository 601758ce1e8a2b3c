#include "attlist/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "attlist/baselines.hpp"
#include "attlist/config_io.hpp"
#include "attlist/errors.hpp"
#include "attlist/kernels.hpp"
#include "attlist/metrics.hpp"
#include "attlist/model.hpp"
#include "attlist/ranker.hpp"
#include "attlist/synthetic.hpp"
#include "attlist/trainer.hpp"

namespace attlist::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string data_dir;
    std::string out;
    uint64_t seed = 42;
    int threads = 0;
};

struct TrainArgs {
    train::TrainConfig config;
    std::string model = "attlist";
    std::string resume;
    bool force = false;
    // Ablation toggles (set by flags).
    bool no_vanilla_attention = false;
    bool no_self_attention = false;
    bool no_residual = false;
    bool no_position = false;
    bool no_id_embeddings = false;
    bool linear_projections = false;
    bool no_padding_mask = false;
    bool aggregate_refined = false;

    void apply_ablation_flags() {
        auto& a = config.ablation;
        if (no_vanilla_attention) a.use_vanilla_attention = false;
        if (no_self_attention) a.use_self_attention = false;
        if (no_residual) a.use_residual = false;
        if (no_position) a.use_position = false;
        if (no_id_embeddings) a.use_id_embeddings = false;
        if (linear_projections) a.use_linear_projections = true;
        if (no_padding_mask) a.mask_padding = false;
        if (aggregate_refined) a.aggregate_refined_at_list_level = true;
    }
};

void add_train_options(CLI::App* cmd, TrainArgs& args) {
    auto& c = args.config;
    cmd->add_option("--lr", c.learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--batch", c.batch_size, "Minibatch size")->capture_default_str();
    cmd->add_option("--d", c.d, "Latent dimensionality")->capture_default_str();
    cmd->add_option("--D", c.D, "Predictive factors (prediction-net width)")
        ->capture_default_str();
    cmd->add_option("--N", c.N, "Profile slots (lists per user)")->capture_default_str();
    cmd->add_option("--M", c.M, "Items per list")->capture_default_str();
    cmd->add_option("--rho", c.rho, "Negatives per positive")->capture_default_str();
    cmd->add_option("--gamma", c.gamma, "Dropout rate")->capture_default_str();
    cmd->add_option("--lambda", c.lambda, "L2 strength on vanilla-attention weights")
        ->capture_default_str();
    cmd->add_option("--max-epochs", c.max_epochs, "Epoch cap")->capture_default_str();
    cmd->add_option("--patience", c.patience, "Early-stopping patience (epochs)")
        ->capture_default_str();
    cmd->add_flag("--clip-gradients", c.clip_gradients, "Clip gradients by global norm");
    cmd->add_option("--clip-threshold", c.clip_threshold, "Gradient clipping threshold")
        ->capture_default_str();

    cmd->add_flag("--no-vanilla-attention", args.no_vanilla_attention,
                  "Replace vanilla attention with mean pooling");
    cmd->add_flag("--no-self-attention", args.no_self_attention, "Remove self-attention");
    cmd->add_flag("--no-residual", args.no_residual, "Remove residual connections");
    cmd->add_flag("--no-position", args.no_position, "Remove position embeddings");
    cmd->add_flag("--no-id-embeddings", args.no_id_embeddings, "Remove user/list ID embeddings");
    cmd->add_flag("--linear-projections", args.linear_projections,
                  "Use Q/K/V projections in self-attention");
    cmd->add_flag("--no-padding-mask", args.no_padding_mask,
                  "Let padding participate in the attention softmaxes");
    cmd->add_flag("--aggregate-refined", args.aggregate_refined,
                  "Aggregate refined list vectors at the list level");
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

void write_effective_config(const std::string& dir, const train::TrainConfig& config,
                            const std::string& model_kind) {
    json j;
    j["model"] = model_kind;
    j["config"] = config;
    write_text(dir + "/effective_config.json", j.dump(2) + "\n");
}

std::string summary_block(const data::InteractionDataset& ds) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "users         %d\n"
                  "lists         %d\n"
                  "interactions  %zu\n"
                  "density       %.3f%%\n"
                  "unique items  %d\n",
                  ds.num_users, ds.num_lists, ds.interactions.size(), ds.density() * 100.0,
                  ds.num_items);
    return buf;
}

json report_json(const eval::MetricsReport& r) {
    return json{{"P@5", r.p5},   {"R@5", r.r5},   {"N@5", r.n5},
                {"P@10", r.p10}, {"R@10", r.r10}, {"N@10", r.n10},
                {"users", r.user_count}, {"config_hash", r.config_hash}};
}

void write_metrics(const std::string& out_dir, const std::string& name,
                   const std::vector<std::pair<std::string, eval::MetricsReport>>& rows) {
    const std::string table = eval::render_table(rows);
    write_text(out_dir + "/" + name + ".txt", table);
    json j;
    for (const auto& [model, r] : rows) j[model] = report_json(r);
    write_text(out_dir + "/" + name + ".json", j.dump(2) + "\n");
    std::cout << table;
}

void write_train_outputs(const std::string& out_dir, const train::TrainResult& result) {
    result.best.save(out_dir + "/checkpoint.bin");
    std::ofstream log(out_dir + "/train_log.jsonl");
    if (!log) throw IoError("cannot write " + out_dir + "/train_log.jsonl");
    for (const auto& rec : result.log) {
        json j{{"epoch", rec.epoch},
               {"train_loss", rec.train_loss},
               {"val_ndcg10", rec.val_ndcg10},
               {"val_p10", rec.val_p10},
               {"seconds", rec.seconds}};
        log << j.dump() << "\n";
    }
}

int cmd_prepare(const CommonArgs& common, const std::string& interactions,
                const std::string& containment, int min_item_freq, int min_user_inter,
                int n_profile, int m_items) {
    data::InteractionDataset ds =
        data::load_dataset(interactions, containment, min_item_freq, min_user_inter);
    if (ds.interactions.empty()) throw ValidationError("no interactions in " + interactions);
    data::split_dataset(ds, {}, common.seed);
    data::save_prepared(ds, common.out, common.seed, min_item_freq, n_profile, m_items);
    std::cout << summary_block(ds);
    return 0;
}

int cmd_synthesize(const CommonArgs& common, const data::SyntheticSpec& spec) {
    data::InteractionDataset ds = data::generate_synthetic(spec);
    data::split_dataset(ds, {}, common.seed);
    data::save_prepared(ds, common.out, common.seed, /*filter_threshold=*/0, /*n_profile=*/15,
                        /*m_items=*/32);
    std::cout << summary_block(ds);
    return 0;
}

int cmd_train(const CommonArgs& common, TrainArgs& args, bool max_epochs_given) {
    data::InteractionDataset ds = data::load_prepared(common.data_dir);
    fs::create_directories(common.out);

    if (args.model == "attlist") {
        train::Checkpoint resume;
        const train::Checkpoint* resume_ptr = nullptr;
        if (!args.resume.empty()) {
            resume = train::Checkpoint::load(args.resume);
            const int requested_epochs = args.config.max_epochs;
            args.config = resume.config;
            if (max_epochs_given) args.config.max_epochs = requested_epochs;
            train::Checkpoint probe;
            probe.model_kind = "attlist";
            probe.config = args.config;
            probe.num_users = ds.num_users;
            probe.num_lists = ds.num_lists;
            probe.num_items = ds.num_items;
            if (probe.config_hash() != resume.config_hash() && !args.force)
                throw ConfigError("resume checkpoint does not match dataset/config "
                                  "(use --force to override)");
            resume_ptr = &resume;
        }
        args.config.seed = common.seed;
        if (resume_ptr) args.config.seed = resume.config.seed;  // keep the original streams
        write_effective_config(common.out, args.config, "attlist");

        train::TrainResult result =
            train::train_attlist(ds, args.config, &std::cout, resume_ptr);
        write_train_outputs(common.out, result);

        const model::AttListModel mdl = train::model_from_checkpoint(result.best);
        const eval::AttListScorer scorer(mdl, ds, args.config.N, args.config.M);
        eval::EvalTask task;
        task.truth_split = data::Split::validation;
        task.exclude_validation = false;
        const eval::MetricsReport report =
            eval::evaluate(scorer, ds, task, result.best.config_hash());
        write_metrics(common.out, "val_report", {{"attlist", report}});
        return 0;
    }

    if (args.model == "mf" || args.model == "bpr") {
        baselines::BaselineConfig bc;
        bc.d = args.config.d;
        bc.learning_rate = args.config.learning_rate;
        bc.rho = args.config.rho;
        bc.reg = args.config.lambda;
        bc.batch_size = args.config.batch_size;
        bc.max_epochs = args.config.max_epochs;
        bc.patience = args.config.patience;
        bc.seed = common.seed;
        write_effective_config(common.out, args.config, args.model);

        const baselines::BaselineResult result = args.model == "mf"
                                                     ? baselines::mf_train(ds, bc, &std::cout)
                                                     : baselines::bpr_train(ds, bc, &std::cout);
        baselines::baseline_checkpoint(args.model, result.model, bc, ds, result.best_metric,
                                       result.best_epoch)
            .save(common.out + "/checkpoint.bin");
        return 0;
    }

    throw ConfigError("unknown model '" + args.model + "' (valid: attlist, mf, bpr, itempop)");
}

int cmd_evaluate(const CommonArgs& common, const std::string& model,
                 const std::string& checkpoint_path, bool exclude_seen, bool force) {
    data::InteractionDataset ds = data::load_prepared(common.data_dir);
    fs::create_directories(common.out);

    eval::EvalTask task;
    task.exclude_train = exclude_seen;
    task.exclude_validation = exclude_seen;

    std::unique_ptr<eval::ListScorer> scorer;
    uint64_t hash = 0;
    std::unique_ptr<model::AttListModel> attlist_model;
    train::Checkpoint ck;

    if (model == "itempop") {
        scorer = std::make_unique<baselines::ItemPopScorer>(ds);
    } else {
        if (checkpoint_path.empty())
            throw ConfigError("--checkpoint is required for model '" + model + "'");
        ck = train::Checkpoint::load(checkpoint_path);
        if (ck.model_kind != model)
            throw ConfigError("checkpoint holds model kind '" + ck.model_kind + "', requested '" +
                              model + "'");
        train::Checkpoint probe = ck;
        probe.num_users = ds.num_users;
        probe.num_lists = ds.num_lists;
        probe.num_items = ds.num_items;
        if (probe.config_hash() != ck.config_hash() && !force)
            throw ConfigError("checkpoint config hash mismatch with dataset "
                              "(use --force to override)");
        hash = ck.config_hash();
        if (model == "attlist") {
            attlist_model =
                std::make_unique<model::AttListModel>(train::model_from_checkpoint(ck));
            scorer = std::make_unique<eval::AttListScorer>(*attlist_model, ds, ck.config.N,
                                                           ck.config.M);
        } else {
            scorer = std::make_unique<baselines::FactorScorer>(
                baselines::factor_model_from_checkpoint(ck));
        }
    }

    const eval::MetricsReport report = eval::evaluate(*scorer, ds, task, hash);
    write_metrics(common.out, "metrics_report", {{model, report}});
    return 0;
}

int cmd_ablate(const CommonArgs& common, TrainArgs& args, std::vector<std::string> variants) {
    data::InteractionDataset ds = data::load_prepared(common.data_dir);
    fs::create_directories(common.out);

    if (variants.empty()) {
        variants = model::ablation_variant_names();
        variants.erase(variants.begin());  // "full" always runs
    }
    for (const auto& v : variants) model::ablation_variant(v);  // validate names up front

    args.config.seed = common.seed;

    auto run_variant = [&](const std::string& name) {
        train::TrainConfig cfg = args.config;
        cfg.ablation = model::ablation_variant(name);
        train::TrainResult result = train::train_attlist(ds, cfg, &std::cout);
        const model::AttListModel mdl = train::model_from_checkpoint(result.best);
        const eval::AttListScorer scorer(mdl, ds, cfg.N, cfg.M);
        eval::EvalTask task;  // test split, exclude seen
        return eval::evaluate(scorer, ds, task, result.best.config_hash());
    };

    std::cout << "ablation: training full model\n";
    const eval::MetricsReport full = run_variant("full");

    json report;
    report["full"] = report_json(full);
    std::vector<std::pair<std::string, eval::MetricsReport>> rows{{"full", full}};

    std::string table = "variant                     P@10    change      R@10    change\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s %8.3f %9s %9.3f %9s\n", "full", full.p10, "", full.r10,
                  "");
    table += line;

    for (const auto& name : variants) {
        std::cout << "ablation: training variant " << name << "\n";
        const eval::MetricsReport r = run_variant(name);
        rows.emplace_back(name, r);
        const double dp = full.p10 > 0 ? (r.p10 - full.p10) / full.p10 * 100.0 : 0.0;
        const double dr = full.r10 > 0 ? (r.r10 - full.r10) / full.r10 * 100.0 : 0.0;
        char cp[32], cr[32];
        std::snprintf(cp, sizeof(cp), "%+.1f%%", dp);
        std::snprintf(cr, sizeof(cr), "%+.1f%%", dr);
        std::snprintf(line, sizeof(line), "%-24s %8.3f %9s %9.3f %9s\n", name.c_str(), r.p10, cp,
                      r.r10, cr);
        table += line;
        report[name] = report_json(r);
        report[name]["P@10_change_pct"] = dp;
        report[name]["R@10_change_pct"] = dr;
    }

    write_text(common.out + "/ablation_report.txt", table);
    write_text(common.out + "/ablation_report.json", report.dump(2) + "\n");
    write_metrics(common.out, "ablation_metrics", rows);
    std::cout << table;
    return 0;
}

int cmd_export_attention(const CommonArgs& common, const std::string& checkpoint_path,
                         const std::vector<std::string>& users,
                         const std::vector<std::string>& lists) {
    data::InteractionDataset ds = data::load_prepared(common.data_dir);
    train::Checkpoint ck = train::Checkpoint::load(checkpoint_path);
    const model::AttListModel mdl = train::model_from_checkpoint(ck);
    data::ProfileBuilder builder(ds, ck.config.N, ck.config.M);

    std::unordered_map<std::string, int> user_index, list_index;
    for (int u = 0; u < ds.num_users; ++u) user_index[ds.user_ids[static_cast<size_t>(u)]] = u;
    for (int l = 0; l < ds.num_lists; ++l) list_index[ds.list_ids[static_cast<size_t>(l)]] = l;

    std::ofstream out(common.out);
    if (!out) throw IoError("cannot write " + common.out);

    auto item_labels = [&ds](const std::vector<int>& ids) {
        json a = json::array();
        for (int id : ids) a.push_back(ds.item_ids[static_cast<size_t>(id)]);
        return a;
    };

    for (const auto& id : lists) {
        const auto it = list_index.find(id);
        if (it == list_index.end()) throw ValidationError("unknown list id '" + id + "'");
        core::Tape tape(/*recording=*/false);
        model::RunContext ctx{tape};
        std::vector<int> items;
        std::vector<uint8_t> mask;
        builder.padded_list(it->second, items, mask);
        const auto lr = mdl.list_repr(ctx, items, mask);
        json rec{{"kind", "list"},
                 {"list", it->second},
                 {"list_id", id},
                 {"items", item_labels(items)},
                 {"scores", lr.scores->values()},
                 {"alpha", lr.alpha->values()}};
        out << rec.dump() << "\n";
    }

    for (const auto& id : users) {
        const auto it = user_index.find(id);
        if (it == user_index.end()) throw ValidationError("unknown user id '" + id + "'");
        core::Tape tape(/*recording=*/false);
        model::RunContext ctx{tape};
        const data::ProfileExample ex = builder.build(it->second, /*list=*/0, /*label=*/0);
        const auto ur = mdl.user_repr(ctx, ex);
        json profile = json::array();
        for (size_t s = 0; s < ex.profile_lists.size(); ++s) {
            profile.push_back(
                json{{"list", ex.profile_lists[s]},
                     {"list_id", ds.list_ids[static_cast<size_t>(ex.profile_lists[s])]},
                     {"items", item_labels(ex.profile_items[s])},
                     {"scores", ur.lists[s].scores->values()},
                     {"alpha", ur.lists[s].alpha->values()}});
        }
        json rec{{"kind", "user"},
                 {"user", it->second},
                 {"user_id", id},
                 {"profile", std::move(profile)},
                 {"list_level", json{{"scores", ur.scores->values()}, {"beta", ur.beta->values()}}}};
        out << rec.dump() << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"AttList: hierarchical self-attentive recommendation of user-generated item lists"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a config file");
    app.allow_config_extras(false);

    CommonArgs common;

    // prepare
    std::string interactions, containment;
    int min_item_freq = 5, min_user_inter = 0, n_profile = 15, m_items = 32;
    CLI::App* prepare = app.add_subcommand("prepare", "Load, filter, split and persist a dataset");
    prepare->add_option("--interactions", interactions, "user<TAB>list interactions file")
        ->required();
    prepare->add_option("--containment", containment, "list<TAB>item<TAB>position file")
        ->required();
    prepare->add_option("--out", common.out, "Output directory")->required();
    prepare->add_option("--seed", common.seed, "Split seed")->capture_default_str();
    prepare->add_option("--min-item-frequency", min_item_freq,
                        "Drop items appearing in fewer lists")
        ->capture_default_str();
    prepare->add_option("--min-user-interactions", min_user_inter,
                        "Drop users with fewer interactions (0 = keep all)")
        ->capture_default_str();
    prepare->add_option("--N", n_profile, "Profile slots recorded in the manifest")
        ->capture_default_str();
    prepare->add_option("--M", m_items, "List length recorded in the manifest")
        ->capture_default_str();

    // synthesize
    data::SyntheticSpec spec;
    CLI::App* synth = app.add_subcommand("synthesize", "Generate a latent-topic dataset");
    synth->add_option("--out", common.out, "Output directory")->required();
    synth->add_option("--users", spec.users, "User count")->required();
    synth->add_option("--lists", spec.lists, "List count")->required();
    synth->add_option("--items", spec.items, "Item count")->required();
    synth->add_option("--topics", spec.topics, "Latent topic count")->capture_default_str();
    synth->add_option("--activity-exponent", spec.user_activity_exponent,
                      "Power-law exponent of lists-per-user")
        ->capture_default_str();
    synth->add_option("--length-exponent", spec.list_length_exponent,
                      "Power-law exponent of items-per-list")
        ->capture_default_str();
    synth->add_option("--noise", spec.noise, "Probability an interaction ignores topic affinity")
        ->capture_default_str();
    synth->add_option("--seed", common.seed, "Generator and split seed")->capture_default_str();

    // train
    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a model on a prepared dataset");
    train_cmd->add_option("--data", common.data_dir, "Prepared dataset directory")->required();
    train_cmd->add_option("--out", common.out, "Output directory")->required();
    train_cmd->add_option("--seed", common.seed, "Training seed")->capture_default_str();
    train_cmd->add_option("--threads", common.threads, "Evaluation threads (0 = all cores)")
        ->capture_default_str();
    train_cmd->add_option("--model", train_args.model, "attlist | mf | bpr")
        ->capture_default_str();
    train_cmd->add_option("--resume", train_args.resume, "Checkpoint to resume from");
    train_cmd->add_flag("--force", train_args.force, "Ignore config-hash mismatch on resume");
    add_train_options(train_cmd, train_args);

    // evaluate
    std::string eval_model = "attlist", checkpoint_path;
    bool exclude_seen = true, force = false;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "Rank and score a trained model");
    eval_cmd->add_option("--data", common.data_dir, "Prepared dataset directory")->required();
    eval_cmd->add_option("--out", common.out, "Output directory")->required();
    eval_cmd->add_option("--model", eval_model, "attlist | itempop | mf | bpr")
        ->capture_default_str();
    eval_cmd->add_option("--checkpoint", checkpoint_path, "Trained checkpoint");
    eval_cmd->add_option("--exclude-seen", exclude_seen,
                         "Exclude the user's train/validation positives from candidates")
        ->capture_default_str();
    eval_cmd->add_flag("--force", force, "Evaluate despite a config-hash mismatch");
    eval_cmd->add_option("--threads", common.threads, "Evaluation threads (0 = all cores)")
        ->capture_default_str();

    // ablate
    TrainArgs ablate_args;
    std::vector<std::string> variants;
    CLI::App* ablate_cmd =
        app.add_subcommand("ablate", "Train and compare architecture variants");
    ablate_cmd->add_option("--data", common.data_dir, "Prepared dataset directory")->required();
    ablate_cmd->add_option("--out", common.out, "Output directory")->required();
    ablate_cmd->add_option("--seed", common.seed, "Shared training seed")->capture_default_str();
    ablate_cmd->add_option("--variants", variants,
                           "Variant names (default: every variant)")
        ->delimiter(',');
    ablate_cmd->add_option("--threads", common.threads, "Evaluation threads (0 = all cores)")
        ->capture_default_str();
    add_train_options(ablate_cmd, ablate_args);

    // export-attention
    std::string export_checkpoint;
    std::vector<std::string> export_users, export_lists;
    CLI::App* export_cmd =
        app.add_subcommand("export-attention", "Write self-attention score grids");
    export_cmd->add_option("--data", common.data_dir, "Prepared dataset directory")->required();
    export_cmd->add_option("--checkpoint", export_checkpoint, "Trained attlist checkpoint")
        ->required();
    export_cmd->add_option("--out", common.out, "Output file (JSON records)")->required();
    export_cmd->add_option("--users", export_users, "User ids to trace")->delimiter(',');
    export_cmd->add_option("--lists", export_lists, "List ids to trace")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (common.threads > 0) core::set_threads(common.threads);
        if (prepare->parsed())
            return cmd_prepare(common, interactions, containment, min_item_freq, min_user_inter,
                               n_profile, m_items);
        if (synth->parsed()) {
            spec.seed = common.seed;
            return cmd_synthesize(common, spec);
        }
        if (train_cmd->parsed()) {
            train_args.apply_ablation_flags();
            train_args.config.validate();
            return cmd_train(common, train_args,
                             train_cmd->get_option("--max-epochs")->count() > 0);
        }
        if (eval_cmd->parsed())
            return cmd_evaluate(common, eval_model, checkpoint_path, exclude_seen, force);
        if (ablate_cmd->parsed()) {
            ablate_args.apply_ablation_flags();
            ablate_args.config.validate();
            return cmd_ablate(common, ablate_args, variants);
        }
        if (export_cmd->parsed())
            return cmd_export_attention(common, export_checkpoint, export_users, export_lists);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}

}  // namespace attlist::cli
