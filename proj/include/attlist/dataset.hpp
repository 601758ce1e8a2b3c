#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace attlist::data {

enum class Split : uint8_t { train = 0, validation = 1, test = 2 };

const char* split_name(Split s);

struct Interaction {
    int user = 0;
    int list = 0;
    Split split = Split::train;
};

// Users, lists, items with dense indices plus the list->items containment
// and the binary user-list interactions. Interaction order is the file
// order, which doubles as the timestamp surrogate everywhere ("most recent"
// means latest in file order). Item index 0 is reserved for the padding
// item and never appears in containment; real items are 1..num_items.
struct InteractionDataset {
    int num_users = 0;
    int num_lists = 0;
    int num_items = 0;  // real items; valid containment ids are 1..num_items

    std::vector<std::vector<int>> containment;  // per list, curation order
    std::vector<Interaction> interactions;

    // Original ids kept for round-tripping and attention export.
    // item_ids[0] is the padding pseudo-item.
    std::vector<std::string> user_ids;
    std::vector<std::string> list_ids;
    std::vector<std::string> item_ids;

    double density() const;
    size_t count_in_split(Split s) const;

    // Per-user interaction indices in file order.
    std::vector<std::vector<int>> interactions_by_user() const;
};

// Parses the raw text files:
//   interactions: one "user-id<TAB>list-id" per line
//   containment:  one "list-id<TAB>item-id<TAB>position" per line
// Items appearing in fewer than min_item_frequency lists are dropped from
// all containment sequences (lists emptied by the filter are kept and become
// all-padding). min_user_interactions < 2 applies no user filter.
InteractionDataset load_dataset(const std::string& interactions_path,
                                const std::string& containment_path, int min_item_frequency,
                                int min_user_interactions = 0);

struct SplitFractions {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
};

// Per-user randomized-rounding split: each user's interactions are shuffled
// and assigned so that every split holds floor(f*n) or floor(f*n)+1 of the
// user's n interactions, with leftover slots drawn proportionally to the
// fractional parts. Deterministic under (seed, user index).
void split_dataset(InteractionDataset& ds, const SplitFractions& fractions, uint64_t seed);

// Prepared-dataset directory: manifest.json + interactions.tsv +
// containment.tsv in dense indices. Save/load round-trips exactly.
void save_prepared(const InteractionDataset& ds, const std::string& dir, uint64_t split_seed,
                   int filter_threshold, int n_profile, int m_items);
InteractionDataset load_prepared(const std::string& dir);

}  // namespace attlist::data
