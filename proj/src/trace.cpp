#include "swarmsim/trace.hpp"

#include <system_error>

#include "swarmsim/errors.hpp"

namespace swarm {

namespace {

template <typename Id>
json optional_id(const std::optional<Id>& id) {
    return id ? json(to_index(*id)) : json(nullptr);
}

template <typename Id>
std::optional<Id> read_optional_id(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return Id{it->get<std::uint32_t>()};
}

template <typename T>
T require(std::optional<T> v, const std::string& what) {
    if (!v) throw ParseError("trace: unknown " + what);
    return *v;
}

FailureReason failure_from_string(const std::string& s) {
    for (auto r : {FailureReason::none, FailureReason::comm_loss, FailureReason::low_battery,
                   FailureReason::critical_battery, FailureReason::depleted,
                   FailureReason::injected}) {
        if (to_string(r) == s) return r;
    }
    throw ParseError("trace: unknown failure reason '" + s + "'");
}

}  // namespace

TickRecord make_record(const WorldState& world) {
    TickRecord r;
    r.tick = world.tick;
    r.time = world.time;
    r.mode = world.mode;
    r.agents.reserve(world.agents.size());
    for (const auto& a : world.agents) {
        r.agents.push_back(AgentRecord{a.id, a.position, a.velocity, a.mode, a.phase.kind,
                                       a.phase.package, a.phase.remaining, a.battery,
                                       a.carried_package, a.failure});
    }
    for (const auto& p : world.packages)
        r.packages.push_back(PackageRecord{p.id, p.spawn_position, p.status, p.assigned_agent});
    for (const auto& o : world.obstacles) {
        if (o.kind == ObstacleKind::human) r.humans.push_back(HumanRecord{o.id, o.center});
    }
    r.events = world.event_log;
    return r;
}

json record_to_json(const TickRecord& r) {
    json agents = json::array();
    for (const auto& a : r.agents) {
        agents.push_back({
            {"id", to_index(a.id)},
            {"p", vec3_to_json(a.position)},
            {"v", vec3_to_json(a.velocity)},
            {"mode", to_string(a.mode)},
            {"phase", to_string(a.phase)},
            {"phase_pkg", optional_id(a.phase_package)},
            {"remaining", a.remaining},
            {"battery", a.battery},
            {"carried", optional_id(a.carried_package)},
            {"failure", to_string(a.failure)},
        });
    }
    json packages = json::array();
    for (const auto& p : r.packages) {
        packages.push_back({{"id", to_index(p.id)},
                            {"p", vec3_to_json(p.spawn_position)},
                            {"status", to_string(p.status)},
                            {"agent", optional_id(p.agent)}});
    }
    json humans = json::array();
    for (const auto& h : r.humans) humans.push_back({{"id", to_index(h.id)}, {"p", vec3_to_json(h.position)}});
    json events = json::array();
    for (const auto& e : r.events) events.push_back(event_to_json(e));

    return {{"type", "tick"},       {"tick", r.tick},         {"time", r.time},
            {"mode", to_string(r.mode)}, {"agents", std::move(agents)},
            {"packages", std::move(packages)}, {"humans", std::move(humans)},
            {"events", std::move(events)}};
}

TickRecord record_from_json(const json& j) {
    try {
        TickRecord r;
        r.tick = j.at("tick").get<long long>();
        r.time = j.at("time").get<double>();
        r.mode = require(flight_mode_from_string(j.at("mode").get<std::string>()), "mode");
        for (const auto& a : j.at("agents")) {
            AgentRecord ar;
            ar.id = AgentId{a.at("id").get<std::uint32_t>()};
            ar.position = vec3_from_json(a.at("p"), "agent.p");
            ar.velocity = vec3_from_json(a.at("v"), "agent.v");
            ar.mode = require(flight_mode_from_string(a.at("mode").get<std::string>()), "mode");
            ar.phase = require(phase_from_string(a.at("phase").get<std::string>()), "phase");
            ar.phase_package = read_optional_id<PackageId>(a, "phase_pkg");
            ar.remaining = a.at("remaining").get<double>();
            ar.battery = a.at("battery").get<double>();
            ar.carried_package = read_optional_id<PackageId>(a, "carried");
            ar.failure = failure_from_string(a.at("failure").get<std::string>());
            r.agents.push_back(ar);
        }
        for (const auto& p : j.at("packages")) {
            PackageRecord pr;
            pr.id = PackageId{p.at("id").get<std::uint32_t>()};
            pr.spawn_position = vec3_from_json(p.at("p"), "package.p");
            pr.status = require(package_status_from_string(p.at("status").get<std::string>()),
                                "package status");
            pr.agent = read_optional_id<AgentId>(p, "agent");
            r.packages.push_back(pr);
        }
        for (const auto& h : j.at("humans"))
            r.humans.push_back(HumanRecord{ObstacleId{h.at("id").get<std::uint32_t>()},
                                           vec3_from_json(h.at("p"), "human.p")});
        for (const auto& e : j.at("events")) r.events.push_back(event_from_json(e));
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("trace record: ") + e.what());
    }
}

TraceHeader make_header(const ScenarioConfig& c) {
    TraceHeader h;
    h.scenario = c.name;
    h.seed = c.seed;
    h.dt = c.dt;
    h.arena = c.arena;
    h.r_collision = c.r_collision;
    h.v_max = c.weights.v_max;
    h.h_pickup = c.mission.h_pickup;
    h.destination = c.destination;
    for (const auto& o : c.obstacles) {
        if (o.kind == ObstacleKind::human) h.human_radii.emplace_back(o.id, o.radius);
    }
    return h;
}

json header_to_json(const TraceHeader& h) {
    json humans = json::array();
    for (const auto& [id, radius] : h.human_radii)
        humans.push_back({{"id", to_index(id)}, {"radius", radius}});
    return {{"type", "header"},
            {"format", "swarmsim-trace/1"},
            {"scenario", h.scenario},
            {"seed", h.seed},
            {"dt", h.dt},
            {"arena",
             {{"min", vec3_to_json(h.arena.min_corner)},
              {"max", vec3_to_json(h.arena.max_corner)},
              {"fence_margin", h.arena.fence_margin}}},
            {"r_collision", h.r_collision},
            {"v_max", h.v_max},
            {"h_pickup", h.h_pickup},
            {"destination", vec3_to_json(h.destination)},
            {"humans", std::move(humans)}};
}

TraceHeader header_from_json(const json& j) {
    try {
        if (j.at("type") != "header") throw ParseError("trace: first line is not a header");
        TraceHeader h;
        h.scenario = j.at("scenario").get<std::string>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.dt = j.at("dt").get<double>();
        h.arena.min_corner = vec3_from_json(j.at("arena").at("min"), "arena.min");
        h.arena.max_corner = vec3_from_json(j.at("arena").at("max"), "arena.max");
        h.arena.fence_margin = j.at("arena").at("fence_margin").get<double>();
        h.r_collision = j.at("r_collision").get<double>();
        h.v_max = j.at("v_max").get<double>();
        h.h_pickup = j.at("h_pickup").get<double>();
        h.destination = vec3_from_json(j.at("destination"), "destination");
        for (const auto& e : j.at("humans"))
            h.human_radii.emplace_back(ObstacleId{e.at("id").get<std::uint32_t>()},
                                       e.at("radius").get<double>());
        return h;
    } catch (const json::exception& e) {
        throw ParseError(std::string("trace header: ") + e.what());
    }
}

TraceWriter::TraceWriter(const std::filesystem::path& path, const TraceHeader& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::system_error(errno, std::generic_category(), "cannot write trace " + path.string());
    out_ << header_to_json(header).dump() << '\n';
}

void TraceWriter::write(const TickRecord& record) {
    out_ << record_to_json(record).dump() << '\n';
    if (!out_) throw std::system_error(errno, std::generic_category(), "write failed for " + path_.string());
}

void TraceWriter::write_summary(const json& summary) {
    json line = summary;
    line["type"] = "summary";
    out_ << line.dump() << '\n';
}

void TraceWriter::flush() { out_.flush(); }

}  // namespace swarm
