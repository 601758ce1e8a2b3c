#pragma once

#include <json.hpp>

#include "attlist/ablation.hpp"
#include "attlist/train_config.hpp"

namespace attlist::model {
void to_json(nlohmann::json& j, const AblationConfig& c);
void from_json(const nlohmann::json& j, AblationConfig& c);
}  // namespace attlist::model

namespace attlist::train {
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
}  // namespace attlist::train
