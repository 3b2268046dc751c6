#pragma once

#include <nlohmann/json.hpp>

#include "offload/types.hpp"

namespace offload {

// Lossless: doubles are written with round-trip precision.
nlohmann::ordered_json snapshot_to_json(const SystemSnapshot& snapshot);
// Throws Error(ProtocolError) on malformed input.
SystemSnapshot snapshot_from_json(const nlohmann::json& j);

}  // namespace offload
