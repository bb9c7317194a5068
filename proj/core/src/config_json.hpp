#pragma once

// JSON conversion shared by checkpoints and training configs. Internal: the
// JSON library is not part of the public headers.

#include "json.hpp"
#include "opbeam/network.hpp"

namespace opbeam::detail {

nlohmann::json network_config_to_json(const QNetworkConfig& cfg);
/// Missing keys keep their defaults; unknown keys throw ParseError.
QNetworkConfig network_config_from_json(const nlohmann::json& j);

}  // namespace opbeam::detail
