#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "sosim/model.hpp"
#include "sosim/world.hpp"

namespace sosim::server {

using nlohmann::json;

/// One line of the wire protocol: compact JSON plus '\n'.
std::string to_line(const json& message);

json schema_message(const ModelInfo& info, const ParamSet& params, const World& world, double frame_rate);
json ack_message(const json& id, std::string_view status, const std::string& result = {});
json error_message(const json& id, const std::string& message);
/// Error with the 1-based source position of a console failure.
json error_message(const json& id, const std::string& message, int line, int column);
json metrics_message(const World& world);

/// Tick-boundary snapshot. Patches are those whose pcolor changed after
/// `patches_since`; std::nullopt sends every patch.
json frame_message(const World& world, std::optional<std::uint64_t> patches_since);
std::string encode_frame(const World& world, std::optional<std::uint64_t> patches_since);

}  // namespace sosim::server
