#pragma once

#include <cstdint>

#include "attlist/dataset.hpp"

namespace attlist::data {

// Latent-topic generator. Items and lists carry a topic; list contents are
// drawn mostly from the list's topic, users prefer one or two topics and
// interact with topic-matching lists except at the noise rate. User activity
// (lists per user) and list length (items per list) follow truncated
// discrete power laws with the given exponents.
struct SyntheticSpec {
    int users = 0;
    int lists = 0;
    int items = 0;
    int topics = 1;
    double user_activity_exponent = 2.0;
    double list_length_exponent = 2.0;
    double noise = 0.0;  // probability an interaction ignores topic affinity
    uint64_t seed = 1;
};

InteractionDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace attlist::data
