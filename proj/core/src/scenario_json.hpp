#pragma once

#include "adaptd/scenario.hpp"
#include "json.hpp"

namespace adaptd::detail {

EnvSpec env_spec_from_json(const nlohmann::json& j);
nlohmann::json env_spec_json(const EnvSpec& spec);

}  // namespace adaptd::detail
