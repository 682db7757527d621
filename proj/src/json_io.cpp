#include "swarmsim/json_io.hpp"

#include <cmath>

namespace swarm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double number_field(const json& j, const char* name, std::string_view cmd) {
    const auto it = j.find(name);
    if (it == j.end() || !it->is_number() || !std::isfinite(it->get<double>()))
        throw CommandRejected("invalid", std::string(cmd) + ": field '" + name +
                                             "' must be a finite number");
    return it->get<double>();
}

std::uint32_t id_field(const json& j, const char* name, std::string_view cmd) {
    const auto it = j.find(name);
    if (it == j.end() || !it->is_number_integer() || it->get<long long>() < 0)
        throw CommandRejected("invalid", std::string(cmd) + ": field '" + name +
                                             "' must be a non-negative integer");
    return static_cast<std::uint32_t>(it->get<long long>());
}

}  // namespace

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || (j.size() != 2 && j.size() != 3))
        throw ParseError(field + ": expected [x, y] or [x, y, z]");
    for (const auto& e : j) {
        if (!e.is_number()) throw ParseError(field + ": coordinates must be numbers");
    }
    Vec3 v{j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? j[2].get<double>() : 0.0};
    if (!v.finite()) throw ParseError(field + ": coordinates must be finite");
    return v;
}

CommandPayload command_from_json(const json& j) {
    if (!j.is_object()) throw CommandRejected("parse", "command must be a JSON object");
    const auto it = j.find("cmd");
    if (it == j.end() || !it->is_string())
        throw CommandRejected("parse", "command needs a string field 'cmd'");
    const std::string name = it->get<std::string>();

    if (name == "start") return StartCmd{};
    if (name == "land") return LandCmd{};
    if (name == "pause") return PauseCmd{};
    if (name == "resume") return ResumeCmd{};
    if (name == "set_mode") {
        const auto m = j.find("mode");
        if (m == j.end() || !m->is_string())
            throw CommandRejected("invalid", "set_mode: field 'mode' must be a string");
        const auto mode = flight_mode_from_string(m->get<std::string>());
        if (!mode) throw CommandRejected("invalid", "set_mode: mode must be 'wander' or 'swarm'");
        return SetModeCmd{*mode};
    }
    if (name == "spawn_package")
        return SpawnPackageCmd{number_field(j, "x", name), number_field(j, "y", name)};
    if (name == "move_human")
        return MoveHumanCmd{ObstacleId{id_field(j, "id", name)}, number_field(j, "x", name),
                            number_field(j, "y", name)};
    if (name == "inject_comm_loss")
        return InjectCommLossCmd{AgentId{id_field(j, "agent", name)},
                                 number_field(j, "duration", name)};
    if (name == "set_rate") return SetRateCmd{number_field(j, "rate", name)};

    throw CommandRejected("unknown_command", "unknown command '" + name + "'");
}

json command_to_json(const CommandPayload& payload) {
    json j{{"cmd", std::string(command_name(payload))}};
    std::visit(overloaded{
                   [&](const SetModeCmd& c) { j["mode"] = std::string(to_string(c.mode)); },
                   [&](const SpawnPackageCmd& c) {
                       j["x"] = c.x;
                       j["y"] = c.y;
                   },
                   [&](const MoveHumanCmd& c) {
                       j["id"] = to_index(c.human);
                       j["x"] = c.x;
                       j["y"] = c.y;
                   },
                   [&](const InjectCommLossCmd& c) {
                       j["agent"] = to_index(c.agent);
                       j["duration"] = c.duration;
                   },
                   [&](const SetRateCmd& c) { j["rate"] = c.rate; },
                   [](const auto&) {},
               },
               payload);
    return j;
}

json event_to_json(const Event& e) {
    json j{{"e", std::string(to_string(e.kind))}};
    if (e.agent) j["agent"] = to_index(*e.agent);
    if (e.package) j["package"] = to_index(*e.package);
    if (!e.detail.empty()) j["detail"] = e.detail;
    return j;
}

Event event_from_json(const json& j) {
    if (!j.is_object() || !j.contains("e") || !j["e"].is_string())
        throw ParseError("event: expected an object with string field 'e'");
    const auto kind = event_kind_from_string(j["e"].get<std::string>());
    if (!kind) throw ParseError("event: unknown kind '" + j["e"].get<std::string>() + "'");
    Event e{*kind, std::nullopt, std::nullopt, {}};
    if (j.contains("agent")) e.agent = AgentId{j["agent"].get<std::uint32_t>()};
    if (j.contains("package")) e.package = PackageId{j["package"].get<std::uint32_t>()};
    if (j.contains("detail")) e.detail = j["detail"].get<std::string>();
    return e;
}

}  // namespace swarm
