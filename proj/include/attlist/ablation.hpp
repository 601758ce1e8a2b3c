#pragma once

#include <string>
#include <vector>

namespace attlist::model {

// Architecture switches. Defaults are the full model: everything on except
// the Q/K/V projections, padding masked in both attention softmaxes, and the
// list-level weighted sum aggregating the unrefined list vectors.
struct AblationConfig {
    bool use_vanilla_attention = true;   // off -> mean pooling
    bool use_self_attention = true;      // off -> identity refinement
    bool use_residual = true;
    bool use_position = true;
    bool use_id_embeddings = true;
    bool use_linear_projections = false;  // Q/K/V projections in self-attention
    bool mask_padding = true;
    bool aggregate_refined_at_list_level = false;

    bool operator==(const AblationConfig&) const = default;
};

// Named variants for the ablation sweep; "full" is the unmodified model.
std::vector<std::string> ablation_variant_names();
AblationConfig ablation_variant(const std::string& name);  // throws ConfigError on unknown

}  // namespace attlist::model
