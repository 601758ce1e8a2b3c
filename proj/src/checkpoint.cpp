#include "attlist/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "attlist/config_io.hpp"
#include "attlist/errors.hpp"

namespace attlist::model {

using nlohmann::json;

void to_json(json& j, const AblationConfig& c) {
    j = json{{"use_vanilla_attention", c.use_vanilla_attention},
             {"use_self_attention", c.use_self_attention},
             {"use_residual", c.use_residual},
             {"use_position", c.use_position},
             {"use_id_embeddings", c.use_id_embeddings},
             {"use_linear_projections", c.use_linear_projections},
             {"mask_padding", c.mask_padding},
             {"aggregate_refined_at_list_level", c.aggregate_refined_at_list_level}};
}

void from_json(const json& j, AblationConfig& c) {
    j.at("use_vanilla_attention").get_to(c.use_vanilla_attention);
    j.at("use_self_attention").get_to(c.use_self_attention);
    j.at("use_residual").get_to(c.use_residual);
    j.at("use_position").get_to(c.use_position);
    j.at("use_id_embeddings").get_to(c.use_id_embeddings);
    j.at("use_linear_projections").get_to(c.use_linear_projections);
    j.at("mask_padding").get_to(c.mask_padding);
    j.at("aggregate_refined_at_list_level").get_to(c.aggregate_refined_at_list_level);
}

}  // namespace attlist::model

namespace attlist::train {

using core::make_tensor;
using core::NamedParam;
using nlohmann::json;

void to_json(json& j, const TrainConfig& c) {
    j = json{{"batch_size", c.batch_size},
             {"learning_rate", c.learning_rate},
             {"d", c.d},
             {"D", c.D},
             {"N", c.N},
             {"M", c.M},
             {"rho", c.rho},
             {"gamma", c.gamma},
             {"lambda", c.lambda},
             {"max_epochs", c.max_epochs},
             {"patience", c.patience},
             {"seed", c.seed},
             {"clip_gradients", c.clip_gradients},
             {"clip_threshold", c.clip_threshold},
             {"ablation", c.ablation}};
}

void from_json(const json& j, TrainConfig& c) {
    j.at("batch_size").get_to(c.batch_size);
    j.at("learning_rate").get_to(c.learning_rate);
    j.at("d").get_to(c.d);
    j.at("D").get_to(c.D);
    j.at("N").get_to(c.N);
    j.at("M").get_to(c.M);
    j.at("rho").get_to(c.rho);
    j.at("gamma").get_to(c.gamma);
    j.at("lambda").get_to(c.lambda);
    j.at("max_epochs").get_to(c.max_epochs);
    j.at("patience").get_to(c.patience);
    j.at("seed").get_to(c.seed);
    j.at("clip_gradients").get_to(c.clip_gradients);
    j.at("clip_threshold").get_to(c.clip_threshold);
    j.at("ablation").get_to(c.ablation);
}

namespace {

constexpr char kMagic[8] = {'A', 'T', 'L', 'S', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

uint64_t Checkpoint::config_hash() const {
    // Only what determines compatibility: architecture and dataset extents.
    // Training-protocol knobs (epochs, learning rate, ...) may differ between
    // the producing run and a resume/evaluation.
    json j;
    j["model_kind"] = model_kind;
    j["d"] = config.d;
    j["D"] = config.D;
    j["N"] = config.N;
    j["M"] = config.M;
    j["ablation"] = config.ablation;
    j["num_users"] = num_users;
    j["num_lists"] = num_lists;
    j["num_items"] = num_items;
    return fnv1a(j.dump());
}

void Checkpoint::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);

    json header;
    header["model_kind"] = model_kind;
    header["config"] = config;
    header["num_users"] = num_users;
    header["num_lists"] = num_lists;
    header["num_items"] = num_items;
    header["epoch"] = epoch;
    header["best_metric"] = best_metric;
    header["best_epoch"] = best_epoch;
    header["adam"] = {{"learning_rate", adam.hyper.learning_rate},
                      {"beta1", adam.hyper.beta1},
                      {"beta2", adam.hyper.beta2},
                      {"epsilon", adam.hyper.epsilon},
                      {"step", adam.step}};
    json tlist = json::array();
    for (const auto& t : tensors) tlist.push_back({{"name", t.name}, {"shape", t.tensor->shape()}});
    header["tensors"] = std::move(tlist);
    const std::string hs = header.dump();

    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, config_hash());
    write_pod(out, static_cast<uint64_t>(hs.size()));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));

    auto write_doubles = [&out](const double* p, size_t n) {
        out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    };
    for (const auto& t : tensors) write_doubles(t.tensor->data(), t.tensor->size());
    for (size_t i = 0; i < tensors.size(); ++i) {
        write_doubles(adam.m[i].data(), adam.m[i].size());
        write_doubles(adam.v[i].data(), adam.v[i].size());
    }
    if (!out) throw IoError("short write on checkpoint: " + path);
}

Checkpoint Checkpoint::load(const std::string& path, uint64_t expect_hash, bool force) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("not a checkpoint file: " + path);
    const uint32_t version = read_pod<uint32_t>(in);
    if (version != kVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    const uint64_t stored_hash = read_pod<uint64_t>(in);
    if (expect_hash != 0 && stored_hash != expect_hash && !force)
        throw ConfigError("checkpoint config hash mismatch (stored " +
                          std::to_string(stored_hash) + ", expected " +
                          std::to_string(expect_hash) + "); use force to override");

    const uint64_t hlen = read_pod<uint64_t>(in);
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    const json header = json::parse(hs);

    Checkpoint ck;
    ck.model_kind = header.at("model_kind").get<std::string>();
    ck.config = header.at("config").get<TrainConfig>();
    ck.num_users = header.at("num_users").get<int>();
    ck.num_lists = header.at("num_lists").get<int>();
    ck.num_items = header.at("num_items").get<int>();
    ck.epoch = header.at("epoch").get<int>();
    ck.best_metric = header.at("best_metric").get<double>();
    ck.best_epoch = header.at("best_epoch").get<int>();
    ck.adam.hyper.learning_rate = header.at("adam").at("learning_rate").get<double>();
    ck.adam.hyper.beta1 = header.at("adam").at("beta1").get<double>();
    ck.adam.hyper.beta2 = header.at("adam").at("beta2").get<double>();
    ck.adam.hyper.epsilon = header.at("adam").at("epsilon").get<double>();
    ck.adam.step = header.at("adam").at("step").get<int64_t>();

    auto read_doubles = [&in, &path](double* p, size_t n) {
        in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw IoError("truncated checkpoint: " + path);
    };
    for (const auto& t : header.at("tensors")) {
        NamedParam np;
        np.name = t.at("name").get<std::string>();
        np.tensor = make_tensor(t.at("shape").get<std::vector<int>>(), /*with_grad=*/true);
        read_doubles(np.tensor->data(), np.tensor->size());
        ck.tensors.push_back(std::move(np));
    }
    for (const auto& t : ck.tensors) {
        ck.adam.m.emplace_back(t.tensor->size());
        ck.adam.v.emplace_back(t.tensor->size());
    }
    for (size_t i = 0; i < ck.tensors.size(); ++i) {
        read_doubles(ck.adam.m[i].data(), ck.adam.m[i].size());
        read_doubles(ck.adam.v[i].data(), ck.adam.v[i].size());
    }
    return ck;
}

}  // namespace attlist::train
