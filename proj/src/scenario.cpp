#include "swarmsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace swarm {

namespace {

std::string join(const std::string& ctx, const char* key) {
    return ctx.empty() ? std::string(key) : ctx + "." + key;
}

void read(const json& obj, const char* key, double& out, const std::string& ctx) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number()) throw ParseError(join(ctx, key) + ": expected a number");
    out = it->get<double>();
}

void read(const json& obj, const char* key, int& out, const std::string& ctx) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_integer()) throw ParseError(join(ctx, key) + ": expected an integer");
    out = it->get<int>();
}

void read(const json& obj, const char* key, bool& out, const std::string& ctx) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_boolean()) throw ParseError(join(ctx, key) + ": expected true or false");
    out = it->get<bool>();
}

void read(const json& obj, const char* key, std::string& out, const std::string& ctx) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_string()) throw ParseError(join(ctx, key) + ": expected a string");
    out = it->get<std::string>();
}

void read(const json& obj, const char* key, Vec3& out, const std::string& ctx) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    out = vec3_from_json(*it, join(ctx, key));
}

const json& object_or_empty(const json& j, const char* key) {
    static const json empty = json::object();
    const auto it = j.find(key);
    if (it == j.end()) return empty;
    if (!it->is_object()) throw ParseError(std::string(key) + ": expected an object");
    return *it;
}

HumanPath parse_path(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
    HumanPath path;
    const auto wp = j.find("waypoints");
    if (wp == j.end() || !wp->is_array() || wp->empty())
        throw ParseError(ctx + ".waypoints: expected a non-empty array");
    for (std::size_t i = 0; i < wp->size(); ++i)
        path.waypoints.push_back(
            vec3_from_json((*wp)[i], ctx + ".waypoints[" + std::to_string(i) + "]"));
    read(j, "speed", path.speed, ctx);
    read(j, "loop", path.loop, ctx);
    return path;
}

Obstacle parse_obstacle(const json& j, std::size_t index) {
    const std::string ctx = "obstacles[" + std::to_string(index) + "]";
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
    Obstacle o;
    int id = static_cast<int>(index);
    read(j, "id", id, ctx);
    if (id < 0) throw ValidationError(ctx + ".id: must be >= 0");
    o.id = ObstacleId{static_cast<std::uint32_t>(id)};
    std::string kind = "static";
    read(j, "kind", kind, ctx);
    if (kind == "human")
        o.kind = ObstacleKind::human;
    else if (kind == "static")
        o.kind = ObstacleKind::static_obstacle;
    else
        throw ParseError(ctx + ".kind: expected 'static' or 'human'");
    read(j, "center", o.center, ctx);
    read(j, "radius", o.radius, ctx);
    if (j.contains("path")) {
        o.path = parse_path(j["path"], ctx + ".path");
        if (!j.contains("center")) o.center = o.path->position_at(0.0);
    }
    o.center.z = 0.0;
    return o;
}

}  // namespace

OperatorCommand scheduled_command_from_json(const json& j) {
    if (!j.is_object() || !j.contains("time") || !j["time"].is_number())
        throw ParseError("command entry needs a numeric 'time'");
    try {
        return OperatorCommand{command_from_json(j), j["time"].get<double>()};
    } catch (const CommandRejected& e) {
        throw ParseError(std::string("command entry: ") + e.what());
    }
}

json scheduled_command_to_json(const OperatorCommand& cmd) {
    json j = command_to_json(cmd.payload);
    j["time"] = cmd.issue_time;
    return j;
}

std::vector<OperatorCommand> load_command_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open command log " + path.string());
    std::vector<OperatorCommand> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(scheduled_command_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void merge_commands(ScenarioConfig& config, const std::vector<OperatorCommand>& extra) {
    config.commands.insert(config.commands.end(), extra.begin(), extra.end());
    std::stable_sort(config.commands.begin(), config.commands.end(),
                     [](const OperatorCommand& a, const OperatorCommand& b) {
                         return a.issue_time < b.issue_time;
                     });
}

ScenarioConfig parse_scenario(const json& j) {
    if (!j.is_object()) throw ParseError("scenario: top level must be an object");
    ScenarioConfig c;
    read(j, "name", c.name, "");
    read(j, "dt", c.dt, "");
    read(j, "duration", c.duration, "");
    read(j, "strict", c.strict, "");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ParseError("seed: expected an unsigned integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }

    const json& arena = object_or_empty(j, "arena");
    read(arena, "min", c.arena.min_corner, "arena");
    read(arena, "max", c.arena.max_corner, "arena");
    read(arena, "fence_margin", c.arena.fence_margin, "arena");

    if (j.contains("agents")) {
        const json& agents = j["agents"];
        if (agents.is_number_integer()) {
            c.agent_count = agents.get<int>();
        } else if (agents.is_array()) {
            for (std::size_t i = 0; i < agents.size(); ++i)
                c.start_positions.push_back(
                    vec3_from_json(agents[i], "agents[" + std::to_string(i) + "]"));
            c.agent_count = static_cast<int>(c.start_positions.size());
        } else {
            throw ParseError("agents: expected a count or an array of start positions");
        }
    }
    const json& layout = object_or_empty(j, "start_layout");
    read(layout, "origin", c.layout.origin, "start_layout");
    read(layout, "spacing", c.layout.spacing, "start_layout");
    read(layout, "columns", c.layout.columns, "start_layout");

    std::string mode = "wander";
    read(j, "initial_mode", mode, "");
    const auto m = flight_mode_from_string(mode);
    if (!m) throw ParseError("initial_mode: expected 'wander' or 'swarm'");
    c.initial_mode = *m;
    read(j, "start_airborne", c.start_airborne, "");
    std::string headings = "zero";
    read(j, "initial_headings", headings, "");
    if (headings != "zero" && headings != "random")
        throw ParseError("initial_headings: expected 'zero' or 'random'");
    c.random_headings = headings == "random";

    const json& w = object_or_empty(j, "weights");
    read(w, "w_separation", c.weights.w_separation, "weights");
    read(w, "w_cohesion", c.weights.w_cohesion, "weights");
    read(w, "w_alignment", c.weights.w_alignment, "weights");
    read(w, "w_wander", c.weights.w_wander, "weights");
    read(w, "w_fence", c.weights.w_fence, "weights");
    read(w, "w_pursuit", c.weights.w_pursuit, "weights");
    read(w, "r_perception", c.weights.r_perception, "weights");
    read(w, "r_separation", c.weights.r_separation, "weights");
    read(w, "v_max", c.weights.v_max, "weights");
    read(w, "obstacle_buffer", c.weights.obstacle_buffer, "weights");
    read(w, "wander_jitter", c.weights.wander_jitter, "weights");
    read(w, "k_z", c.weights.k_z, "weights");

    const json& mi = object_or_empty(j, "mission");
    read(mi, "hover_duration", c.mission.hover_duration, "mission");
    read(mi, "h_pickup", c.mission.h_pickup, "mission");
    read(mi, "h_cruise", c.mission.h_cruise, "mission");
    read(mi, "v_land", c.mission.v_land, "mission");
    read(mi, "arrival_radius", c.mission.arrival_radius, "mission");
    read(mi, "hover_tolerance", c.mission.hover_tolerance, "mission");

    const json& ob = object_or_empty(j, "onboard");
    read(ob, "tau", c.onboard.tau, "onboard");
    read(ob, "watchdog_timeout", c.onboard.watchdog_timeout, "onboard");

    const json& ch = object_or_empty(j, "channel");
    read(ch, "latency_ticks", c.channel.latency_ticks, "channel");
    read(ch, "drop_probability", c.channel.drop_probability, "channel");
    if (ch.contains("blackouts")) {
        const json& bs = ch["blackouts"];
        if (!bs.is_array()) throw ParseError("channel.blackouts: expected an array");
        for (std::size_t i = 0; i < bs.size(); ++i) {
            const std::string ctx = "channel.blackouts[" + std::to_string(i) + "]";
            int agent = -1;
            Blackout b{AgentId{}, 0.0, 0.0};
            read(bs[i], "agent", agent, ctx);
            read(bs[i], "start", b.start, ctx);
            read(bs[i], "duration", b.duration, ctx);
            if (agent < 0) throw ValidationError(ctx + ".agent: required, must be >= 0");
            b.agent = AgentId{static_cast<std::uint32_t>(agent)};
            c.channel.blackouts.push_back(b);
        }
    }

    const json& pw = object_or_empty(j, "power");
    read(pw, "rotation", c.power.rotation, "power");
    read(pw, "rate_flying", c.power.rate_flying, "power");
    read(pw, "rate_hovering", c.power.rate_hovering, "power");
    read(pw, "low_threshold", c.power.low_threshold, "power");
    read(pw, "critical_threshold", c.power.critical_threshold, "power");
    read(pw, "launch_threshold", c.power.launch_threshold, "power");

    if (j.contains("station")) {
        const json& st = object_or_empty(j, "station");
        StationConfig s;
        read(st, "position", s.position, "station");
        read(st, "slots", s.slots, "station");
        read(st, "slot_spacing", s.slot_spacing, "station");
        read(st, "charge_rate", s.charge_rate, "station");
        read(st, "dock_radius", s.dock_radius, "station");
        read(st, "spares", s.spares, "station");
        c.station = s;
    }

    if (j.contains("obstacles")) {
        const json& obs = j["obstacles"];
        if (!obs.is_array()) throw ParseError("obstacles: expected an array");
        for (std::size_t i = 0; i < obs.size(); ++i) c.obstacles.push_back(parse_obstacle(obs[i], i));
    }

    read(j, "destination", c.destination, "");
    c.destination.z = 0.0;
    read(j, "r_collision", c.r_collision, "");

    if (j.contains("commands")) {
        const json& cmds = j["commands"];
        if (!cmds.is_array()) throw ParseError("commands: expected an array");
        for (const auto& e : cmds) c.commands.push_back(scheduled_command_from_json(e));
        merge_commands(c, {});
    }

    if (j.contains("faults")) {
        const json& fs = j["faults"];
        if (!fs.is_array()) throw ParseError("faults: expected an array");
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const std::string ctx = "faults[" + std::to_string(i) + "]";
            Fault f;
            std::string kind;
            int agent = -1;
            read(fs[i], "time", f.time, ctx);
            read(fs[i], "kind", kind, ctx);
            read(fs[i], "agent", agent, ctx);
            read(fs[i], "value", f.value, ctx);
            if (kind == "battery")
                f.kind = FaultKind::battery;
            else if (kind == "fail")
                f.kind = FaultKind::fail;
            else
                throw ParseError(ctx + ".kind: expected 'battery' or 'fail'");
            if (agent < 0) throw ValidationError(ctx + ".agent: required, must be >= 0");
            f.agent = AgentId{static_cast<std::uint32_t>(agent)};
            c.faults.push_back(f);
        }
        std::stable_sort(c.faults.begin(), c.faults.end(),
                         [](const Fault& a, const Fault& b) { return a.time < b.time; });
    }

    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return parse_scenario(j);
}

std::vector<Vec3> ScenarioConfig::resolved_start_positions() const {
    std::vector<Vec3> out;
    if (!start_positions.empty()) {
        for (auto p : start_positions) out.push_back({p.x, p.y, 0.0});
    } else {
        const int cols = layout.columns > 0
                             ? layout.columns
                             : std::max(1, static_cast<int>(std::ceil(std::sqrt(agent_count))));
        for (int i = 0; i < agent_count; ++i)
            out.push_back({layout.origin.x + (i % cols) * layout.spacing,
                           layout.origin.y + (i / cols) * layout.spacing, 0.0});
    }
    return out;
}

std::vector<Vec3> ScenarioConfig::slot_positions() const {
    std::vector<Vec3> out;
    if (!station) return out;
    for (int i = 0; i < station->slots; ++i)
        out.push_back(station->position + Vec3{i * station->slot_spacing, 0.0, 0.0});
    return out;
}

void ScenarioConfig::validate() const {
    arena.validate();
    if (!(dt > 0.0 && dt <= 0.1)) throw ValidationError("dt: must be in (0, 0.1]");
    if (!(duration > 0.0)) throw ValidationError("duration: must be > 0");
    if (agent_count < 0) throw ValidationError("agents: count must be >= 0");
    if (!(r_collision > 0.0)) throw ValidationError("r_collision: must be > 0");
    weights.validate();
    mission.validate();
    power.validate();
    if (!(onboard.tau > 0.0)) throw ValidationError("onboard.tau: must be > 0");
    if (!(onboard.watchdog_timeout > 0.0))
        throw ValidationError("onboard.watchdog_timeout: must be > 0");
    if (mission.h_cruise >= arena.max_corner.z)
        throw ValidationError("mission.h_cruise: must be below the arena ceiling");

    const auto starts = resolved_start_positions();
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (!arena.contains_footprint(starts[i].x, starts[i].y))
            throw ValidationError("agents[" + std::to_string(i) + "]: start position outside arena");
        for (std::size_t k = i + 1; k < starts.size(); ++k) {
            const double d = distance(starts[i], starts[k]);
            if (d < 2.0 * r_collision) {
                std::ostringstream msg;
                msg << "agents[" << i << "] and agents[" << k << "]: start positions " << d
                    << " m apart (minimum " << 2.0 * r_collision << ")";
                throw ValidationError(msg.str());
            }
        }
    }

    if (station) {
        if (station->slots < 1) throw ValidationError("station.slots: must be >= 1");
        if (station->spares < 0 || station->spares > station->slots)
            throw ValidationError("station.spares: must be in [0, slots]");
        if (!(station->charge_rate >= 0.0)) throw ValidationError("station.charge_rate: must be >= 0");
        if (!(station->dock_radius > 0.0)) throw ValidationError("station.dock_radius: must be > 0");
        for (const auto& p : slot_positions()) {
            if (!arena.contains(p)) throw ValidationError("station: slot position outside arena");
        }
    }
    channel.validate(static_cast<std::size_t>(total_agents()));

    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const auto& o = obstacles[i];
        const std::string ctx = "obstacles[" + std::to_string(i) + "]";
        if (!(o.radius > 0.0)) throw ValidationError(ctx + ".radius: must be > 0");
        if (o.kind == ObstacleKind::static_obstacle && o.path)
            throw ValidationError(ctx + ".path: static obstacles cannot move");
        if (!arena.contains_footprint(o.center.x, o.center.y))
            throw ValidationError(ctx + ".center: outside arena");
        if (o.path) {
            if (!(o.path->speed > 0.0)) throw ValidationError(ctx + ".path.speed: must be > 0");
            for (const auto& wp : o.path->waypoints) {
                if (!arena.contains_footprint(wp.x, wp.y))
                    throw ValidationError(ctx + ".path: waypoint outside arena");
            }
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (obstacles[k].id == o.id) throw ValidationError(ctx + ".id: duplicate obstacle id");
        }
    }

    if (!arena.contains_footprint(destination.x, destination.y))
        throw ValidationError("destination: outside arena");

    for (std::size_t i = 0; i < commands.size(); ++i) {
        const auto& cmd = commands[i];
        const std::string ctx = "commands[" + std::to_string(i) + "]";
        if (!(cmd.issue_time >= 0.0)) throw ValidationError(ctx + ".time: must be >= 0");
        if (const auto* s = std::get_if<SpawnPackageCmd>(&cmd.payload)) {
            if (!arena.contains_footprint(s->x, s->y))
                throw ValidationError(ctx + ": spawn_package outside arena footprint");
        }
        if (const auto* c = std::get_if<InjectCommLossCmd>(&cmd.payload)) {
            if (to_index(c->agent) >= static_cast<std::size_t>(total_agents()))
                throw ValidationError(ctx + ".agent: unknown agent id");
        }
        if (const auto* h = std::get_if<MoveHumanCmd>(&cmd.payload)) {
            const bool known = std::any_of(obstacles.begin(), obstacles.end(), [&](const Obstacle& o) {
                return o.id == h->human && o.kind == ObstacleKind::human;
            });
            if (!known) throw ValidationError(ctx + ".id: unknown human id");
        }
    }

    for (std::size_t i = 0; i < faults.size(); ++i) {
        const auto& f = faults[i];
        const std::string ctx = "faults[" + std::to_string(i) + "]";
        if (to_index(f.agent) >= static_cast<std::size_t>(total_agents()))
            throw ValidationError(ctx + ".agent: unknown agent id");
        if (f.kind == FaultKind::battery && !(f.value >= 0.0 && f.value <= 1.0))
            throw ValidationError(ctx + ".value: battery level must be in [0, 1]");
    }
}

}  // namespace swarm
