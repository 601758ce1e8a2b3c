#include <doctest.h>

#include <set>
#include <utility>

#include "attlist/errors.hpp"
#include "attlist/synthetic.hpp"
#include "support/oracles.hpp"

using namespace attlist;
using data::SyntheticSpec;

TEST_CASE("synthetic: validation") {
    SyntheticSpec bad;
    bad.users = 10;
    bad.lists = 5;
    bad.items = 20;
    bad.topics = 6;  // more topics than lists
    CHECK_THROWS_AS(data::generate_synthetic(bad), ConfigError);

    bad.topics = 2;
    bad.noise = 1.5;
    CHECK_THROWS_AS(data::generate_synthetic(bad), ConfigError);
}

TEST_CASE("synthetic: single topic, zero noise touches only topic-0 lists") {
    SyntheticSpec spec;
    spec.users = 50;
    spec.lists = 30;
    spec.items = 100;
    spec.topics = 1;
    spec.noise = 0.0;
    spec.seed = 3;
    const auto ds = data::generate_synthetic(spec);
    CHECK(ds.num_users == 50);
    CHECK(!ds.interactions.empty());
    // All lists are topic 0, so the property is that interactions exist and
    // containment sequences are nonempty with valid ids.
    for (const auto& seq : ds.containment) {
        CHECK(!seq.empty());
        for (int item : seq) {
            CHECK(item >= 1);
            CHECK(item <= ds.num_items);
        }
    }
    // No duplicate (user, list) pairs.
    std::set<std::pair<int, int>> seen;
    for (const auto& it : ds.interactions)
        CHECK(seen.insert({it.user, it.list}).second);
}

TEST_CASE("synthetic: determinism") {
    SyntheticSpec spec;
    spec.users = 40;
    spec.lists = 25;
    spec.items = 80;
    spec.topics = 3;
    spec.noise = 0.2;
    spec.seed = 11;
    const auto a = data::generate_synthetic(spec);
    const auto b = data::generate_synthetic(spec);
    CHECK(a.containment == b.containment);
    REQUIRE(a.interactions.size() == b.interactions.size());
    for (size_t i = 0; i < a.interactions.size(); ++i) {
        CHECK(a.interactions[i].user == b.interactions[i].user);
        CHECK(a.interactions[i].list == b.interactions[i].list);
    }
}

TEST_CASE("synthetic: user activity follows the requested power law") {
    SyntheticSpec spec;
    spec.users = 10000;
    spec.lists = 2000;
    spec.items = 500;
    spec.topics = 5;
    spec.noise = 0.1;
    spec.user_activity_exponent = 2.0;
    spec.seed = 21;
    const auto ds = data::generate_synthetic(spec);

    std::vector<int> activity(static_cast<size_t>(ds.num_users), 0);
    for (const auto& it : ds.interactions) activity[static_cast<size_t>(it.user)] += 1;

    const double slope = oracles::loglog_slope(activity);
    CHECK(slope > -2.4);
    CHECK(slope < -1.6);
}

TEST_CASE("synthetic: list lengths follow a heavy-tailed distribution") {
    SyntheticSpec spec;
    spec.users = 100;
    spec.lists = 5000;
    spec.items = 2000;
    spec.topics = 4;
    spec.list_length_exponent = 2.0;
    spec.seed = 31;
    const auto ds = data::generate_synthetic(spec);

    std::vector<int> lengths;
    lengths.reserve(ds.containment.size());
    for (const auto& seq : ds.containment) lengths.push_back(static_cast<int>(seq.size()));
    const double slope = oracles::loglog_slope(lengths);
    CHECK(slope < -1.0);  // clearly heavy-tailed, most lists short
}
