#pragma once

#include "json.hpp"

#include "swarmsim/mission.hpp"
#include "swarmsim/world.hpp"

namespace swarm {

using json = nlohmann::json;

json vec3_to_json(const Vec3& v);
// Accepts [x, y] (z = 0) or [x, y, z]; throws ParseError otherwise.
Vec3 vec3_from_json(const json& j, const std::string& field);

// Wire/scenario form: {"cmd": "spawn_package", "x": 3, "y": 4}. Unknown
// fields are ignored. Throws CommandRejected with reason "parse",
// "unknown_command" or "invalid".
CommandPayload command_from_json(const json& j);
json command_to_json(const CommandPayload& payload);

json event_to_json(const Event& e);
Event event_from_json(const json& j);

}  // namespace swarm
