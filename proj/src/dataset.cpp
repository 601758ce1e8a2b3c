#include "attlist/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "attlist/errors.hpp"
#include "attlist/rng.hpp"

namespace attlist::data {

using attlist::core::CounterRng;
using attlist::core::stream_id;
using nlohmann::json;

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "?";
}

double InteractionDataset::density() const {
    if (num_users == 0 || num_lists == 0) return 0.0;
    return static_cast<double>(interactions.size()) /
           (static_cast<double>(num_users) * static_cast<double>(num_lists));
}

size_t InteractionDataset::count_in_split(Split s) const {
    size_t n = 0;
    for (const auto& it : interactions)
        if (it.split == s) ++n;
    return n;
}

std::vector<std::vector<int>> InteractionDataset::interactions_by_user() const {
    std::vector<std::vector<int>> by_user(static_cast<size_t>(num_users));
    for (size_t i = 0; i < interactions.size(); ++i)
        by_user[static_cast<size_t>(interactions[i].user)].push_back(static_cast<int>(i));
    return by_user;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

struct ContainmentEntry {
    std::string item;
    long position;
    size_t line_no;  // tie-break for equal positions
};

}  // namespace

InteractionDataset load_dataset(const std::string& interactions_path,
                                const std::string& containment_path, int min_item_frequency,
                                int min_user_interactions) {
    std::ifstream cont_in(containment_path);
    if (!cont_in) throw IoError("cannot open containment file: " + containment_path);

    // list-id -> entries, in first-appearance order of lists.
    std::vector<std::string> list_order;
    std::unordered_map<std::string, std::vector<ContainmentEntry>> list_entries;
    {
        std::string line;
        size_t line_no = 0;
        while (std::getline(cont_in, line)) {
            ++line_no;
            if (line.empty() || line == "\r") continue;
            auto fields = split_fields(line);
            if (fields.size() != 3)
                throw ParseError(containment_path + ":" + std::to_string(line_no) +
                                 ": expected list<TAB>item<TAB>position, got " +
                                 std::to_string(fields.size()) + " fields");
            long pos = 0;
            try {
                size_t consumed = 0;
                pos = std::stol(fields[2], &consumed);
                if (consumed != fields[2].size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError(containment_path + ":" + std::to_string(line_no) +
                                 ": position is not an integer: '" + fields[2] + "'");
            }
            auto [it, inserted] = list_entries.try_emplace(fields[0]);
            if (inserted) list_order.push_back(fields[0]);
            it->second.push_back({fields[1], pos, line_no});
        }
    }

    // Item frequency = number of distinct lists an item appears in.
    std::unordered_map<std::string, int> item_freq;
    for (const auto& lid : list_order) {
        std::unordered_set<std::string> seen;
        for (const auto& e : list_entries[lid])
            if (seen.insert(e.item).second) ++item_freq[e.item];
    }

    std::ifstream inter_in(interactions_path);
    if (!inter_in) throw IoError("cannot open interactions file: " + interactions_path);

    std::vector<std::pair<std::string, std::string>> raw_interactions;
    {
        std::string line;
        size_t line_no = 0;
        while (std::getline(inter_in, line)) {
            ++line_no;
            if (line.empty() || line == "\r") continue;
            auto fields = split_fields(line);
            if (fields.size() != 2)
                throw ParseError(interactions_path + ":" + std::to_string(line_no) +
                                 ": expected user<TAB>list, got " + std::to_string(fields.size()) +
                                 " fields");
            if (!list_entries.count(fields[1]))
                throw IntegrityError(interactions_path + ":" + std::to_string(line_no) +
                                     ": list '" + fields[1] + "' not present in containment");
            raw_interactions.emplace_back(fields[0], fields[1]);
        }
    }

    // Optional user filter (off by default).
    if (min_user_interactions > 1) {
        std::unordered_map<std::string, int> user_count;
        for (const auto& [u, l] : raw_interactions) ++user_count[u];
        std::vector<std::pair<std::string, std::string>> kept;
        kept.reserve(raw_interactions.size());
        for (auto& p : raw_interactions)
            if (user_count[p.first] >= min_user_interactions) kept.push_back(std::move(p));
        raw_interactions = std::move(kept);
    }

    InteractionDataset ds;

    // Dense ids in first-appearance order.
    std::unordered_map<std::string, int> list_index;
    for (const auto& lid : list_order) {
        list_index.emplace(lid, static_cast<int>(ds.list_ids.size()));
        ds.list_ids.push_back(lid);
    }
    ds.num_lists = static_cast<int>(ds.list_ids.size());

    std::unordered_map<std::string, int> item_index;  // real items only
    ds.item_ids.push_back("<pad>");
    ds.containment.resize(static_cast<size_t>(ds.num_lists));
    for (const auto& lid : list_order) {
        auto& entries = list_entries[lid];
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return a.position != b.position ? a.position < b.position : a.line_no < b.line_no;
        });
        auto& seq = ds.containment[static_cast<size_t>(list_index[lid])];
        for (const auto& e : entries) {
            if (item_freq[e.item] < min_item_frequency) continue;
            auto [it, inserted] = item_index.try_emplace(
                e.item, static_cast<int>(ds.item_ids.size()));
            if (inserted) ds.item_ids.push_back(e.item);
            seq.push_back(it->second);
        }
    }
    ds.num_items = static_cast<int>(ds.item_ids.size()) - 1;

    std::unordered_map<std::string, int> user_index;
    std::unordered_set<uint64_t> seen_pairs;
    for (const auto& [uid, lid] : raw_interactions) {
        auto [it, inserted] = user_index.try_emplace(uid, static_cast<int>(ds.user_ids.size()));
        if (inserted) ds.user_ids.push_back(uid);
        const int u = it->second;
        const int l = list_index[lid];
        const uint64_t key = (static_cast<uint64_t>(u) << 32) | static_cast<uint32_t>(l);
        if (!seen_pairs.insert(key).second)
            throw IntegrityError("duplicate interaction: user '" + uid + "', list '" + lid + "'");
        ds.interactions.push_back({u, l, Split::train});
    }
    ds.num_users = static_cast<int>(ds.user_ids.size());
    return ds;
}

void split_dataset(InteractionDataset& ds, const SplitFractions& fractions, uint64_t seed) {
    const double sum = fractions.train + fractions.validation + fractions.test;
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1, got " + std::to_string(sum));

    const double f[3] = {fractions.train, fractions.validation, fractions.test};
    auto by_user = ds.interactions_by_user();
    for (int u = 0; u < ds.num_users; ++u) {
        auto& idx = by_user[static_cast<size_t>(u)];
        CounterRng rng(seed, stream_id(0x5714, static_cast<uint64_t>(u)));
        rng.shuffle(idx);

        const size_t n = idx.size();
        size_t counts[3];
        double frac[3];
        size_t assigned = 0;
        for (int k = 0; k < 3; ++k) {
            const double exact = f[k] * static_cast<double>(n);
            counts[k] = static_cast<size_t>(exact);
            frac[k] = exact - static_cast<double>(counts[k]);
            assigned += counts[k];
        }
        // Hand out the leftover slots proportionally to the fractional parts.
        for (size_t r = assigned; r < n; ++r) {
            double total = frac[0] + frac[1] + frac[2];
            int pick = 0;
            if (total > 0.0) {
                const double x = rng.next_double() * total;
                double acc = 0.0;
                for (int k = 0; k < 3; ++k) {
                    acc += frac[k];
                    if (x < acc || k == 2) {
                        pick = k;
                        break;
                    }
                }
            }
            counts[pick] += 1;
            frac[pick] = 0.0;
        }

        size_t pos = 0;
        for (int k = 0; k < 3; ++k)
            for (size_t c = 0; c < counts[k]; ++c)
                ds.interactions[static_cast<size_t>(idx[pos++])].split = static_cast<Split>(k);
    }
}

namespace {

constexpr int kPreparedFormatVersion = 1;

}  // namespace

void save_prepared(const InteractionDataset& ds, const std::string& dir, uint64_t split_seed,
                   int filter_threshold, int n_profile, int m_items) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);

    {
        std::ofstream out(dir + "/interactions.tsv");
        if (!out) throw IoError("cannot write " + dir + "/interactions.tsv");
        for (const auto& it : ds.interactions)
            out << it.user << '\t' << it.list << '\t' << static_cast<int>(it.split) << '\n';
    }
    {
        std::ofstream out(dir + "/containment.tsv");
        if (!out) throw IoError("cannot write " + dir + "/containment.tsv");
        for (int l = 0; l < ds.num_lists; ++l) {
            const auto& seq = ds.containment[static_cast<size_t>(l)];
            for (size_t p = 0; p < seq.size(); ++p)
                out << l << '\t' << seq[p] << '\t' << p << '\n';
        }
    }
    {
        json manifest;
        manifest["format_version"] = kPreparedFormatVersion;
        manifest["num_users"] = ds.num_users;
        manifest["num_lists"] = ds.num_lists;
        manifest["num_items"] = ds.num_items;
        manifest["num_interactions"] = ds.interactions.size();
        manifest["density"] = ds.density();
        manifest["split_seed"] = split_seed;
        manifest["item_filter_threshold"] = filter_threshold;
        manifest["profile_slots"] = n_profile;
        manifest["list_length"] = m_items;
        manifest["profile_selection"] = "most-recent-by-file-order";
        manifest["padding_item_index"] = 0;
        manifest["user_ids"] = ds.user_ids;
        manifest["list_ids"] = ds.list_ids;
        manifest["item_ids"] = ds.item_ids;
        std::ofstream out(dir + "/manifest.json");
        if (!out) throw IoError("cannot write " + dir + "/manifest.json");
        out << manifest.dump(2) << '\n';
    }
}

InteractionDataset load_prepared(const std::string& dir) {
    std::ifstream min(dir + "/manifest.json");
    if (!min) throw IoError("cannot open " + dir + "/manifest.json");
    json manifest = json::parse(min, nullptr, /*allow_exceptions=*/true);

    InteractionDataset ds;
    ds.num_users = manifest.at("num_users").get<int>();
    ds.num_lists = manifest.at("num_lists").get<int>();
    ds.num_items = manifest.at("num_items").get<int>();
    ds.user_ids = manifest.at("user_ids").get<std::vector<std::string>>();
    ds.list_ids = manifest.at("list_ids").get<std::vector<std::string>>();
    ds.item_ids = manifest.at("item_ids").get<std::vector<std::string>>();

    ds.containment.resize(static_cast<size_t>(ds.num_lists));
    {
        std::ifstream in(dir + "/containment.tsv");
        if (!in) throw IoError("cannot open " + dir + "/containment.tsv");
        int l, item;
        long pos;
        while (in >> l >> item >> pos) {
            if (l < 0 || l >= ds.num_lists)
                throw IntegrityError("containment.tsv: list index " + std::to_string(l) +
                                     " out of range");
            if (item < 1 || item > ds.num_items)
                throw IntegrityError("containment.tsv: item index " + std::to_string(item) +
                                     " out of range");
            ds.containment[static_cast<size_t>(l)].push_back(item);
        }
    }
    {
        std::ifstream in(dir + "/interactions.tsv");
        if (!in) throw IoError("cannot open " + dir + "/interactions.tsv");
        int u, l, s;
        while (in >> u >> l >> s) {
            if (u < 0 || u >= ds.num_users || l < 0 || l >= ds.num_lists || s < 0 || s > 2)
                throw IntegrityError("interactions.tsv: record out of range");
            ds.interactions.push_back({u, l, static_cast<Split>(s)});
        }
    }
    if (ds.interactions.size() != manifest.at("num_interactions").get<size_t>())
        throw IntegrityError("interaction count disagrees with manifest");
    return ds;
}

}  // namespace attlist::data
