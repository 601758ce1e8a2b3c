#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "attlist/cli.hpp"
#include "attlist/config_io.hpp"
#include "attlist/dataset.hpp"

using namespace attlist;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("attlist-cli-" + std::to_string(
                                     std::chrono::steady_clock::now().time_since_epoch().count()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name, const std::string& content) const {
        const std::string p = (path / name).string();
        std::ofstream out(p);
        out << content;
        return p;
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"attlist"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_tiny_corpus(const TempDir& dir, std::string& inter, std::string& cont) {
    std::string interactions, containment;
    for (int u = 0; u < 8; ++u)
        for (int l = 0; l < 6; ++l)
            if ((u + l) % 2 == 0)
                interactions += "user" + std::to_string(u) + "\tlist" + std::to_string(l) + "\n";
    for (int l = 0; l < 6; ++l)
        for (int i = 0; i < 4; ++i)
            containment += "list" + std::to_string(l) + "\titem" + std::to_string((l + i) % 9) +
                           "\t" + std::to_string(i) + "\n";
    inter = dir.file("interactions.tsv", interactions);
    cont = dir.file("containment.tsv", containment);
}

}  // namespace

TEST_CASE("cli: prepare fails cleanly on an empty interactions file") {
    TempDir dir;
    const std::string inter = dir.file("empty.tsv", "");
    const std::string cont = dir.file("cont.tsv", "L1\ti1\t0\n");
    CHECK(run({"prepare", "--interactions", inter, "--containment", cont, "--out",
               dir.sub("out")}) != 0);
}

TEST_CASE("cli: prepare is deterministic under a fixed seed") {
    TempDir dir;
    std::string inter, cont;
    write_tiny_corpus(dir, inter, cont);

    CHECK(run({"prepare", "--interactions", inter, "--containment", cont, "--out", dir.sub("a"),
               "--seed", "9", "--min-item-frequency", "1"}) == 0);
    CHECK(run({"prepare", "--interactions", inter, "--containment", cont, "--out", dir.sub("b"),
               "--seed", "9", "--min-item-frequency", "1"}) == 0);
    CHECK(slurp(dir.sub("a") + "/manifest.json") == slurp(dir.sub("b") + "/manifest.json"));
    CHECK(slurp(dir.sub("a") + "/interactions.tsv") == slurp(dir.sub("b") + "/interactions.tsv"));
    CHECK(slurp(dir.sub("a") + "/containment.tsv") == slurp(dir.sub("b") + "/containment.tsv"));

    const auto ds = data::load_prepared(dir.sub("a"));
    CHECK(ds.num_users == 8);
    CHECK(ds.num_lists == 6);
}

TEST_CASE("cli: synthesize produces byte-identical outputs per seed") {
    TempDir dir;
    const std::vector<std::string> base = {"synthesize", "--users", "30",   "--lists", "20",
                                           "--items",    "60",     "--topics", "3",    "--seed",
                                           "4"};
    auto with_out = [&](const std::string& out) {
        auto args = base;
        args.push_back("--out");
        args.push_back(out);
        return args;
    };
    CHECK(run(with_out(dir.sub("s1"))) == 0);
    CHECK(run(with_out(dir.sub("s2"))) == 0);
    CHECK(slurp(dir.sub("s1") + "/manifest.json") == slurp(dir.sub("s2") + "/manifest.json"));
    CHECK(slurp(dir.sub("s1") + "/interactions.tsv") ==
          slurp(dir.sub("s2") + "/interactions.tsv"));
    CHECK(slurp(dir.sub("s1") + "/containment.tsv") == slurp(dir.sub("s2") + "/containment.tsv"));
}

TEST_CASE("cli: train, evaluate, resume and export-attention fit together") {
    TempDir dir;
    CHECK(run({"synthesize", "--users", "16", "--lists", "12", "--items", "40", "--topics", "2",
               "--seed", "6", "--out", dir.sub("data")}) == 0);

    const std::vector<std::string> train_flags = {
        "--data", dir.sub("data"), "--seed", "3",  "--d",   "4",  "--D",     "5",
        "--N",    "3",             "--M",    "4",  "--rho", "1",  "--gamma", "0",
        "--lambda", "0",           "--batch", "8", "--lr",  "0.01"};

    auto train_args = train_flags;
    train_args.insert(train_args.begin(), "train");
    train_args.push_back("--out");
    train_args.push_back(dir.sub("run"));
    train_args.push_back("--max-epochs");
    train_args.push_back("2");
    CHECK(run(train_args) == 0);
    CHECK(fs::exists(dir.sub("run") + "/checkpoint.bin"));
    CHECK(fs::exists(dir.sub("run") + "/train_log.jsonl"));
    CHECK(fs::exists(dir.sub("run") + "/effective_config.json"));
    CHECK(fs::exists(dir.sub("run") + "/val_report.txt"));

    // The epoch log is one JSON record per epoch.
    {
        std::ifstream log(dir.sub("run") + "/train_log.jsonl");
        std::string line;
        int epochs = 0;
        while (std::getline(log, line)) {
            const json rec = json::parse(line);
            CHECK(rec.at("epoch").get<int>() == ++epochs);
            CHECK(rec.contains("train_loss"));
            CHECK(rec.contains("val_ndcg10"));
            CHECK(rec.contains("val_p10"));
            CHECK(rec.contains("seconds"));
        }
        CHECK(epochs == 2);
    }

    CHECK(run({"evaluate", "--data", dir.sub("data"), "--out", dir.sub("eval"), "--model",
               "attlist", "--checkpoint", dir.sub("run") + "/checkpoint.bin"}) == 0);
    CHECK(fs::exists(dir.sub("eval") + "/metrics_report.txt"));
    CHECK(fs::exists(dir.sub("eval") + "/metrics_report.json"));

    // Same checkpoint evaluated twice gives identical reports.
    CHECK(run({"evaluate", "--data", dir.sub("data"), "--out", dir.sub("eval2"), "--model",
               "attlist", "--checkpoint", dir.sub("run") + "/checkpoint.bin"}) == 0);
    CHECK(slurp(dir.sub("eval") + "/metrics_report.json") ==
          slurp(dir.sub("eval2") + "/metrics_report.json"));

    // Resume continues the epoch numbering.
    auto resume_args = train_flags;
    resume_args.insert(resume_args.begin(), "train");
    resume_args.push_back("--out");
    resume_args.push_back(dir.sub("resumed"));
    resume_args.push_back("--resume");
    resume_args.push_back(dir.sub("run") + "/checkpoint.bin");
    resume_args.push_back("--max-epochs");
    resume_args.push_back("4");
    CHECK(run(resume_args) == 0);
    {
        std::ifstream log(dir.sub("resumed") + "/train_log.jsonl");
        std::string line;
        REQUIRE(std::getline(log, line));
        const json rec = json::parse(line);
        CHECK(rec.at("epoch").get<int>() > 1);
    }

    // ItemPop evaluates without any checkpoint.
    CHECK(run({"evaluate", "--data", dir.sub("data"), "--out", dir.sub("pop"), "--model",
               "itempop"}) == 0);

    // Export attention for a known list and user; unknown ids are fatal.
    const auto ds = data::load_prepared(dir.sub("data"));
    CHECK(run({"export-attention", "--data", dir.sub("data"), "--checkpoint",
               dir.sub("run") + "/checkpoint.bin", "--out", dir.sub("att.jsonl"), "--lists",
               ds.list_ids[0], "--users", ds.user_ids[0]}) == 0);
    {
        std::ifstream in(dir.sub("att.jsonl"));
        std::string line;
        int records = 0;
        while (std::getline(in, line)) {
            const json rec = json::parse(line);
            CHECK(rec.contains("kind"));
            if (rec["kind"] == "list") {
                const auto scores = rec.at("scores").get<std::vector<double>>();
                const auto alpha = rec.at("alpha").get<std::vector<double>>();
                const size_t m = alpha.size();
                REQUIRE(scores.size() == m * m);
                double alpha_sum = 0.0;
                for (double a : alpha) alpha_sum += a;
                CHECK(alpha_sum == doctest::Approx(1.0).epsilon(1e-9));
                for (size_t i = 0; i < m; ++i) {
                    double row = 0.0;
                    for (size_t j = 0; j < m; ++j) row += scores[i * m + j];
                    CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
                }
            }
            ++records;
        }
        CHECK(records == 2);
    }
    CHECK(run({"export-attention", "--data", dir.sub("data"), "--checkpoint",
               dir.sub("run") + "/checkpoint.bin", "--out", dir.sub("att2.jsonl"), "--lists",
               "no-such-list"}) != 0);

    // Evaluating against a different dataset refuses on hash mismatch.
    CHECK(run({"synthesize", "--users", "17", "--lists", "12", "--items", "40", "--topics", "2",
               "--seed", "6", "--out", dir.sub("data2")}) == 0);
    CHECK(run({"evaluate", "--data", dir.sub("data2"), "--out", dir.sub("eval3"), "--model",
               "attlist", "--checkpoint", dir.sub("run") + "/checkpoint.bin"}) != 0);
}

TEST_CASE("cli: ablate validates variant names before training") {
    TempDir dir;
    CHECK(run({"synthesize", "--users", "10", "--lists", "8", "--items", "20", "--seed", "2",
               "--out", dir.sub("data")}) == 0);
    CHECK(run({"ablate", "--data", dir.sub("data"), "--out", dir.sub("ab"), "--variants",
               "-NoSuchVariant"}) != 0);
}

TEST_CASE("cli: single-variant ablation emits the change table") {
    TempDir dir;
    CHECK(run({"synthesize", "--users", "14", "--lists", "10", "--items", "30", "--topics", "2",
               "--seed", "8", "--out", dir.sub("data")}) == 0);
    CHECK(run({"ablate", "--data", dir.sub("data"), "--out", dir.sub("ab"), "--variants",
               "-SelfAttention", "--d", "4", "--D", "5", "--N", "3", "--M", "4", "--rho", "1",
               "--gamma", "0", "--lambda", "0", "--batch", "8", "--max-epochs", "2", "--seed",
               "3"}) == 0);
    const std::string table = slurp(dir.sub("ab") + "/ablation_report.txt");
    CHECK(table.find("full") != std::string::npos);
    CHECK(table.find("-SelfAttention") != std::string::npos);
    CHECK(table.find('%') != std::string::npos);
    const json report = json::parse(slurp(dir.sub("ab") + "/ablation_report.json"));
    CHECK(report.contains("full"));
    CHECK(report.at("-SelfAttention").contains("P@10_change_pct"));
}

TEST_CASE("cli: effective config round-trips through JSON canonically") {
    train::TrainConfig config;
    config.d = 17;
    config.gamma = 0.25;
    config.ablation.use_residual = false;
    const json j1 = config;
    const train::TrainConfig back = j1.get<train::TrainConfig>();
    CHECK(back == config);
    const json j2 = back;
    CHECK(j1.dump() == j2.dump());
}

TEST_CASE("cli: unknown model and missing checkpoint are fatal") {
    TempDir dir;
    CHECK(run({"synthesize", "--users", "10", "--lists", "8", "--items", "20", "--seed", "2",
               "--out", dir.sub("data")}) == 0);
    CHECK(run({"train", "--data", dir.sub("data"), "--out", dir.sub("x"), "--model",
               "nonesuch"}) != 0);
    CHECK(run({"evaluate", "--data", dir.sub("data"), "--out", dir.sub("y"), "--model", "mf"}) !=
          0);
}
